#pragma once

#include <functional>
#include <optional>

#include "hspn/harness/config.hpp"
#include "hspn/harness/model.hpp"

namespace hspn {

struct EpochLog {
  int epoch = 0;
  double loss_g = 0.0;  // predictor: L1; completion: L3
  double loss_d = 0.0;  // predictor only
  double cd = 0.0;
  double emd = 0.0;  // completion only
};

struct TrainResult {
  std::vector<EpochLog> curve;
  double initial_cd = 0.0;  // eval-mode CD before training
  double final_cd = 0.0;    // and after
  int steps = 0;
};

using EpochHook = std::function<void(int epoch)>;

/// Thrown when a loss goes non-finite; a diagnostic snapshot has been
/// written to diag_path when one was given.
struct TrainingDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Adversarial predictor training: n_critic critic updates per generator
/// update, WGAN-GP on the critic, lambda1*KL + lambda2*CD - E[D] on the
/// generator. With adversarial=false the critic is ignored entirely.
TrainResult train_predictor(const TrainConfig& cfg,
                            const std::vector<SyntheticSample>& dataset,
                            PredictorModel& model, bool adversarial = true,
                            const std::string& diag_path = "",
                            const EpochHook& on_epoch = nullptr);

/// Completion training against a frozen predictor: the predictor's
/// deterministic outputs are the network inputs, the joint perception loss
/// lambda3*CD + lambda4*EMD drives the encoder/decoder.
TrainResult train_completion(const TrainConfig& cfg,
                             const std::vector<SyntheticSample>& dataset,
                             const PredictorModel& frozen,
                             CompletionModel& model,
                             const std::string& diag_path = "",
                             const EpochHook& on_epoch = nullptr);

/// Samples selected for training under the config's split policy.
std::vector<int> training_indices(const TrainConfig& cfg,
                                  const std::vector<SyntheticSample>& dataset);

/// Image stack for a sample at the config's slice depth (the stored slice
/// for k = 1, re-rendered planes otherwise).
Mat image_stack_for(const SyntheticSample& s, int slices);

/// Partial cloud materialized at exactly 2048 points (critic diet): all
/// points plus seeded duplicates.
PointCloud resample_to(const PointCloud& cloud, int n, Rng& rng);

void write_curves_csv(const std::vector<EpochLog>& curve, bool predictor,
                      const std::string& path);

}  // namespace hspn
