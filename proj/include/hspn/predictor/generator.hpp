#pragma once

#include "hspn/geometry/point_cloud.hpp"
#include "hspn/nn/layers.hpp"
#include "hspn/predictor/image_encoder.hpp"

namespace hspn {

inline constexpr int kCloudSize = 2048;

/// Branching schedule of the tree generator. The defaults expand a single
/// 96-wide root to 2048 xyz leaves through six branch+graph-conv stages.
struct BranchingConfig {
  std::vector<int> degrees = {2, 2, 2, 2, 2, 64};
  std::vector<int> feature_widths = {96, 256, 256, 256, 128, 128, 3};
  int k_support = 10;
  int root_count = 1;
  int expected_leaves = kCloudSize;

  int stage_count() const { return static_cast<int>(degrees.size()); }
  int leaf_count() const {
    int n = root_count;
    for (int d : degrees) n *= d;
    return n;
  }
  /// Degrees/widths must be consistent and multiply out to expected_leaves.
  void validate() const;
};

/// Per-level point features plus the parent links that define every point's
/// ancestor path.
struct TreeState {
  std::vector<Mat> levels;               // levels[l]: count_l x width_l
  std::vector<std::vector<int>> parent;  // parent[l][i], defined for l >= 1

  int level_count() const { return static_cast<int>(levels.size()); }
  /// Ancestor indices of point i at `level`, ordered root..parent
  /// (length == level).
  std::vector<int> ancestor_path(int level, int i) const;
};

/// Graph-conv block mapping (branched) level features of width w_in to
/// width w_out: out_i = lrelu( sum_k W_k p_i + sum_j U_j q_ij + b ) where
/// q_ij walks i's ancestors. With no ancestors and K = 1 this is a plain
/// affine map under the activation.
struct GcnBlock {
  std::vector<nn::Param> support;     // K of w_out x w_in
  std::vector<nn::Param> ancestor_u;  // one per ancestor level, w_out x w_j
  nn::Param bias;                     // 1 x w_out

  void init(const std::string& name, int w_in, int w_out, int k_support,
            const std::vector<int>& ancestor_widths, Rng& rng);

  /// feats: branched features at some level; paths[i] must have one entry
  /// per ancestor_u map. Returns the pre-activation; apply lrelu outside.
  Mat forward_pre(const Mat& feats, const std::vector<std::vector<int>>& paths,
                  const std::vector<Mat>& ancestor_levels) const;

  /// Reverse of forward_pre from d(pre): accumulates parameter grads,
  /// returns d(feats) and adds ancestor contributions into dlevels.
  Mat backward_pre(const Mat& feats, const std::vector<std::vector<int>>& paths,
                   const std::vector<Mat>& ancestor_levels, const Mat& dpre,
                   std::vector<Mat>* dlevels);

  void params(nn::ParamRefs& out) {
    for (auto& p : support) out.push_back(&p);
    for (auto& p : ancestor_u) out.push_back(&p);
    out.push_back(&bias);
  }
};

/// Branching step: every point spawns `degree` children through per-child
/// affine maps, children inherit the parent's ancestor path extended by the
/// parent itself.
struct BranchStage {
  std::vector<nn::Param> child_w;  // degree of w x w
  std::vector<nn::Param> child_b;  // degree of 1 x w

  void init(const std::string& name, int width, int degree, Rng& rng);
  Mat forward(const Mat& parent_feats, std::vector<int>* parent_index) const;
  Mat backward(const Mat& parent_feats, const Mat& dchildren);

  void params(nn::ParamRefs& out) {
    for (auto& p : child_w) out.push_back(&p);
    for (auto& p : child_b) out.push_back(&p);
  }
};

/// z -> tree -> 2048 x 3 point cloud.
class Generator {
 public:
  void init(const BranchingConfig& config, Rng& rng);
  const BranchingConfig& config() const { return config_; }

  struct Memo {
    TreeState tree;                    // post-activation level features
    std::vector<Mat> branched;         // per stage: branched inputs
    std::vector<Mat> pre;              // per stage: gcn pre-activations
    std::vector<std::vector<std::vector<int>>> paths;  // per stage, per child
  };

  PointCloud generate(const LatentCode& code, Memo* memo) const;

  /// Backward from d(cloud coordinates) (leaf_count x 3); accumulates all
  /// parameter grads and returns dL/dz.
  Vec backward(const Memo& memo, const Mat& dcloud);

  void params(nn::ParamRefs& out) {
    for (auto& b : branches_) b.params(out);
    for (auto& g : gcn_) g.params(out);
  }

 private:
  BranchingConfig config_;
  std::vector<BranchStage> branches_;
  std::vector<GcnBlock> gcn_;
};

}  // namespace hspn
