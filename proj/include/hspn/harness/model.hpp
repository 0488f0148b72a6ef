#pragma once

#include <string>

#include "hspn/completion/network.hpp"
#include "hspn/io/container.hpp"
#include "hspn/predictor/critic.hpp"
#include "hspn/predictor/generator.hpp"
#include "hspn/predictor/image_encoder.hpp"

namespace hspn {

/// Image encoder + branching generator + critic, trained as one unit.
struct PredictorModel {
  ImageEncoder encoder;
  Generator generator;
  Critic critic;
  BranchingConfig branching;
  int slices = 1;

  void init(uint64_t seed, int in_slices, const BranchingConfig& cfg = {});

  nn::ParamRefs generator_params();  // encoder + generator
  nn::ParamRefs critic_params();

  /// Deterministic inference: z = mu, no sampling.
  PointCloud predict(const Mat& image_stack) const;
};

struct CompletionModel {
  CompletionNet net;
  CompletionConfig config;

  void init(uint64_t seed, const CompletionConfig& cfg = {});
  nn::ParamRefs params();
};

// Checkpoint sections. A predictor checkpoint carries "predictor/..."; a
// combined checkpoint adds "completion/...". The RNG state travels along.
void save_predictor(io::Container& c, PredictorModel& model);
void load_predictor(const io::Container& c, PredictorModel& model);
void save_completion(io::Container& c, CompletionModel& model);
void load_completion(const io::Container& c, CompletionModel& model);

void save_checkpoint(const std::string& path, PredictorModel* pred,
                     CompletionModel* comp, const std::string& rng_state);
struct LoadedCheckpoint {
  bool has_predictor = false;
  bool has_completion = false;
  std::string rng_state;
};
LoadedCheckpoint load_checkpoint(const std::string& path, PredictorModel* pred,
                                 CompletionModel* comp);

}  // namespace hspn
