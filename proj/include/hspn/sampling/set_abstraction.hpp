#pragma once

#include "hspn/nn/layers.hpp"
#include "hspn/sampling/sampling.hpp"

namespace hspn {

/// One set-abstraction level: FPS centroids, ball grouping, a shared
/// per-point MLP over [relative xyz | input features], and a max reduction
/// per group.
class SetAbstraction {
 public:
  /// in_width is the incoming feature width C (0 for raw clouds). When
  /// global is true the level collapses to a single centroid-anchored group
  /// over every point (radius ignored).
  void init(const std::string& name, int in_width, const GroupingSpec& spec,
            bool global, Rng& rng);

  struct Memo {
    std::vector<int> centers;
    std::vector<std::vector<int>> groups;
    Mat stacked;                  // (npoint*kmax) x (3+C) MLP input
    std::vector<Mat> pre;         // pre-activations per MLP layer
    std::vector<std::vector<int>> argmax;  // per group, per channel
    int in_size = 0;
    int in_width = 0;
  };

  FeaturedCloud forward(const FeaturedCloud& in, Memo* memo) const;

  /// Backward from d(out features); accumulates MLP parameter grads and
  /// returns gradients w.r.t. the input features and input coordinates.
  void backward(const Memo& memo, const Mat& dout, Mat* dfeat, Mat* dcoord);

  void params(nn::ParamRefs& out) {
    for (auto& l : mlp_) l.params(out);
  }

  const GroupingSpec& spec() const { return spec_; }
  int out_width() const { return spec_.mlp_widths.back(); }
  int fps_seed = 0;
  bool canonical_seed = false;  // seed FPS from geometry, not index 0

 private:
  GroupingSpec spec_;
  bool global_ = false;
  std::vector<nn::Linear> mlp_;
};

}  // namespace hspn
