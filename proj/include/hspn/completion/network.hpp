#pragma once

#include "hspn/completion/agb.hpp"
#include "hspn/sampling/set_abstraction.hpp"

namespace hspn {

/// Sizes for the hierarchical completion network. The encoder mirrors
/// 2048 -> 512 -> 128 -> global; the decoder expands 1 -> 128 -> 512 -> 2048.
struct CompletionConfig {
  GroupingSpec sa1{512, 0.2, 32, {32, 64}};
  GroupingSpec sa2{128, 0.4, 32, {64, 128}};
  std::vector<int> sa3_widths{128, 256};

  int d_att = 64;
  int dec1_points = 128;
  int dec1_width = 64;
  int dec2_factor = 4;
  int dec2_width = 64;
  int dec3_factor = 4;
  int dec3_width = 32;

  /// Ablation switches: cross-attention AGBs on the pipeline blocks and the
  /// self-attention AGB on the last block.
  bool use_cross_agb = true;
  bool use_self_agb = true;

  int latent_width() const { return sa3_widths.back(); }
  int output_points() const { return dec1_points * dec2_factor * dec3_factor; }
};

struct EncodeResult {
  Vec global;                     // latent feature vector
  std::vector<SkipFeature> skips; // level 1 then level 2
};

/// Partial cloud in, completed 2048-point cloud out.
class CompletionNet {
 public:
  void init(const CompletionConfig& config, Rng& rng);
  const CompletionConfig& config() const { return config_; }

  struct Memo {
    SetAbstraction::Memo sa1, sa2, sa3;
    FeaturedCloud s1, s2, s3;
    Mat q1, q2;      // [xyz | features] views of the skips
    Agb::Memo agb1, agb2, agb3;
    Mat p0;          // 1 x latent
    Mat agb1_out, agb2_out, agb3_out;
    Mat e1_pre, b1;  // block 1 expansion (reshaped) and activation
    Mat e2_pre, b2;
    Mat e3_pre, b3;
  };

  /// Three set-abstraction levels; emits the two pipeline skips + global.
  EncodeResult encode_hierarchy(const PointCloud& partial, Memo* memo) const;

  PointCloud complete(const PointCloud& partial, Memo* memo) const;

  /// Backward from d(output coordinates); accumulates every parameter grad.
  void backward(const Memo& memo, const Mat& dcloud);

  void params(nn::ParamRefs& out);

 private:
  Mat decode(Memo& m) const;

  CompletionConfig config_;
  SetAbstraction sa1_, sa2_, sa3_;
  Agb agb1_, agb2_, agb3_;
  nn::Linear expand1_, expand2_, expand3_, project_;
};

/// Joint perception loss lambda3*CD + lambda4*EMD. Sizes may differ; the
/// EMD term is then taken over an equal-size random subsample drawn with
/// rng (required in that case).
double loss_completion(const PointCloud& pred, const PointCloud& gt,
                       double lambda3, double lambda4, Rng* rng = nullptr);

struct CompletionLoss {
  double loss = 0.0;
  double cd = 0.0;
  double emd = 0.0;
};

/// Loss with gradient w.r.t. pred, with the EMD term evaluated on at most
/// emd_points points (scaled back to the full-cloud convention).
CompletionLoss loss_completion_grad(const PointCloud& pred, const PointCloud& gt,
                                    double lambda3, double lambda4,
                                    int emd_points, Rng& rng, Mat* dpred);

}  // namespace hspn
