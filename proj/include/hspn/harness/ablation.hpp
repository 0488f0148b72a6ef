#pragma once

#include "hspn/harness/evaluate.hpp"
#include "hspn/harness/train.hpp"

namespace hspn {

/// Closed set of ablation tags (the robustness sweeps run under their own
/// subcommands but share the registry).
extern const std::vector<std::string> kAblationTags;
bool is_ablation_tag(const std::string& tag);

struct AblationRow {
  std::string tag;
  bool standin = false;              // simplified reimplementation
  std::vector<int> ckpt_epochs;      // 1-based epoch counts
  std::vector<double> cd_at_ckpt;    // measured mean CD per checkpoint
  std::vector<double> reference_x01; // source-table values (display only)
};

/// Trains and evaluates every requested variant end-to-end under one seed
/// and dataset, recording CD at each checkpoint epoch. Unknown tags raise
/// std::invalid_argument.
std::vector<AblationRow> run_ablation(const TrainConfig& cfg,
                                      const std::vector<int>& ckpt_epochs,
                                      const std::vector<SyntheticSample>& dataset,
                                      const std::vector<std::string>& tags,
                                      const std::string& eval_split);

void write_ablation_table(const std::vector<AblationRow>& rows,
                          const std::string& path);

/// Robustness to the image stack depth: retrains the pipeline per k.
struct SliceRow {
  int k = 0;
  double cd_mean = 0.0;
  double reference_x01 = 0.0;
};
std::vector<SliceRow> robustness_slices(const TrainConfig& cfg,
                                        const std::vector<SyntheticSample>& dataset,
                                        const std::string& eval_split);

}  // namespace hspn
