#pragma once

#include "hspn/harness/model.hpp"
#include "hspn/harness/config.hpp"

namespace hspn {

struct SampleMetric {
  std::string id;
  double cd = 0.0;
  double pc2pc_mean = 0.0;
  double pc2pc_p95 = 0.0;
};

struct EvalReport {
  std::vector<SampleMetric> rows;
  double cd_mean = 0.0;
  double cd_std = 0.0;
};

/// Full pipeline metrics over a dataset split ("train", "test" or "all").
/// subsample_n > 0 subsamples the predictor output before completion
/// (robustness runs); 0 passes it through untouched.
EvalReport evaluate(const PredictorModel& pred, const CompletionModel& comp,
                    const std::vector<SyntheticSample>& dataset,
                    const std::string& split, int slices, int subsample_n,
                    uint64_t subsample_seed);

/// metrics_<name>.jsonl (one row per sample) and summary_<name>.csv with the
/// CD also shown in the x1e-1 table convention.
void write_eval_report(const EvalReport& r, const std::string& out_dir,
                       const std::string& name);

/// Robustness to input cardinality: one evaluate() per n. Annotations carry
/// reference table values for display only.
struct RobustRow {
  int n = 0;
  double cd_mean = 0.0;
  double reference_x01 = 0.0;  // displayed, never asserted
};
std::vector<RobustRow> robustness_points(const PredictorModel& pred,
                                         const CompletionModel& comp,
                                         const std::vector<SyntheticSample>& dataset,
                                         const std::string& split,
                                         uint64_t subsample_seed);
void write_robust_table(const std::vector<RobustRow>& rows, const char* key_name,
                        const std::string& path);

}  // namespace hspn
