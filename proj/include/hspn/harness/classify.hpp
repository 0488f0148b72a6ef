#pragma once

#include "hspn/harness/train.hpp"

namespace hspn {

/// Set-abstraction binary classifier (real cloud vs generated cloud).
class PointClassifier {
 public:
  void init(uint64_t seed);

  double score(const PointCloud& cloud) const;  // sigmoid "true" probability

  /// One BCE/Adam pass over the labelled clouds per epoch.
  void train(const std::vector<const PointCloud*>& clouds,
             const std::vector<int>& labels, int epochs, double lr, Rng& rng);

  nn::ParamRefs params();
  nn::Linear& head() { return h2_; }

 private:
  double logit(const PointCloud& cloud, struct ClassifierMemo* memo) const;
  void backward(struct ClassifierMemo& memo, double dlogit);

  SetAbstraction sa1_, sa2_, sa3_;
  nn::Linear h1_, h2_;

  friend struct ClassifierMemo;
};

struct ClassifyResult {
  std::string tag;
  double mean_true_score = 0.0;
};

/// Pre-trains the classifier on ground truth (true) against every variant's
/// generated clouds (false), then reports the mean "true" probability of
/// each variant's test-time generations.
std::vector<ClassifyResult> classify_experiment(
    const TrainConfig& cfg, const std::vector<SyntheticSample>& dataset,
    const std::vector<std::pair<std::string, std::string>>& tag_ckpts,
    const std::string& eval_split);

}  // namespace hspn
