#include "hspn/harness/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "hspn/geometry/metrics.hpp"
#include "hspn/harness/train.hpp"

namespace hspn {

namespace fs = std::filesystem;

EvalReport evaluate(const PredictorModel& pred, const CompletionModel& comp,
                    const std::vector<SyntheticSample>& dataset,
                    const std::string& split, int slices, int subsample_n,
                    uint64_t subsample_seed) {
  EvalReport rep;
  for (const auto& s : dataset) {
    if (split != "all" && s.split != split) continue;

    PointCloud stage = pred.predict(image_stack_for(s, slices));
    if (subsample_n > 0 && subsample_n < stage.size()) {
      Rng rng(Rng::splitmix64(subsample_seed ^ Rng::splitmix64(rep.rows.size() + 1)));
      // uniform subsample without replacement
      std::vector<int> idx(stage.size());
      for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
      for (int i = 0; i < subsample_n; ++i) {
        const int j = i + static_cast<int>(rng.uniform_index(idx.size() - i));
        std::swap(idx[i], idx[j]);
      }
      PointCloud sub(subsample_n);
      for (int i = 0; i < subsample_n; ++i)
        for (int k = 0; k < 3; ++k) sub.xyz[3 * i + k] = stage.xyz[3 * idx[i] + k];
      stage = std::move(sub);
    }

    const PointCloud completed = comp.net.complete(stage, nullptr);

    SampleMetric m;
    m.id = s.id;
    m.cd = chamfer(completed, s.gt);
    auto errs = pc_to_pc_error(completed, s.gt);
    double acc = 0.0;
    for (double e : errs) acc += e;
    m.pc2pc_mean = acc / errs.size();
    std::sort(errs.begin(), errs.end());
    const size_t rank = static_cast<size_t>(std::ceil(0.95 * errs.size()));
    m.pc2pc_p95 = errs[std::min(errs.size() - 1, rank > 0 ? rank - 1 : 0)];
    rep.rows.push_back(std::move(m));
  }
  if (rep.rows.empty())
    throw std::invalid_argument("evaluate: no samples in split '" + split + "'");

  double mean = 0.0;
  for (const auto& r : rep.rows) mean += r.cd;
  mean /= rep.rows.size();
  double var = 0.0;
  for (const auto& r : rep.rows) var += (r.cd - mean) * (r.cd - mean);
  rep.cd_mean = mean;
  rep.cd_std = rep.rows.size() > 1 ? std::sqrt(var / (rep.rows.size() - 1)) : 0.0;
  return rep;
}

void write_eval_report(const EvalReport& r, const std::string& out_dir,
                       const std::string& name) {
  fs::create_directories(out_dir);
  {
    std::ofstream f(fs::path(out_dir) / ("metrics_" + name + ".jsonl"),
                    std::ios::trunc);
    char buf[256];
    for (const auto& row : r.rows) {
      std::snprintf(buf, sizeof buf,
                    "{\"id\":\"%s\",\"cd\":%.9g,\"cd_x1e-1\":%.9g,"
                    "\"pc2pc_mean\":%.9g,\"pc2pc_p95\":%.9g}\n",
                    row.id.c_str(), row.cd, row.cd * 10.0, row.pc2pc_mean,
                    row.pc2pc_p95);
      f << buf;
    }
  }
  {
    std::ofstream f(fs::path(out_dir) / ("summary_" + name + ".csv"),
                    std::ios::trunc);
    char buf[256];
    f << "name,count,cd_mean,cd_mean_x1e-1,cd_std\n";
    std::snprintf(buf, sizeof buf, "%s,%zu,%.9g,%.9g,%.9g\n", name.c_str(),
                  r.rows.size(), r.cd_mean, r.cd_mean * 10.0, r.cd_std);
    f << buf;
  }
}

std::vector<RobustRow> robustness_points(const PredictorModel& pred,
                                         const CompletionModel& comp,
                                         const std::vector<SyntheticSample>& dataset,
                                         const std::string& split,
                                         uint64_t subsample_seed) {
  // reference trend from the source table, shown alongside (never asserted)
  const std::pair<int, double> reference[] = {
      {2048, 4.461}, {1024, 4.655}, {512, 4.836}, {256, 5.178}};
  std::vector<RobustRow> rows;
  for (const auto& [n, ref] : reference) {
    const EvalReport r = evaluate(pred, comp, dataset, split, pred.slices,
                                  n == 2048 ? 0 : n, subsample_seed);
    rows.push_back({n, r.cd_mean, ref});
  }
  return rows;
}

void write_robust_table(const std::vector<RobustRow>& rows, const char* key_name,
                        const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  char buf[256];
  f << key_name << ",cd_mean,cd_mean_x1e-1,reference_x1e-1\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.3f\n", r.n, r.cd_mean,
                  r.cd_mean * 10.0, r.reference_x01);
    f << buf;
  }
}

}  // namespace hspn
