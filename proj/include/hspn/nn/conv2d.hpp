#pragma once

#include "hspn/nn/layers.hpp"

namespace hspn::nn {

/// Feature map stored pixel-major: rows = h*w, cols = channels.
struct FeatureMap {
  int h = 0;
  int w = 0;
  Mat data;  // (h*w) x channels

  FeatureMap() = default;
  FeatureMap(int h_, int w_, int channels) : h(h_), w(w_), data(h_ * w_, channels) {}
  int channels() const { return data.cols; }
};

/// 3x3 convolution, stride 2, zero padding 1, via im2col + gemm.
struct Conv2d {
  static constexpr int kKernel = 3;
  static constexpr int kStride = 2;
  static constexpr int kPad = 1;

  Param W;  // out_ch x (in_ch * 9)
  Param b;  // 1 x out_ch

  void init(const std::string& name, int in_ch, int out_ch, Rng& rng);

  static int out_extent(int in) { return (in + 2 * kPad - kKernel) / kStride + 1; }

  FeatureMap forward(const FeatureMap& x) const;
  /// Accumulates parameter grads; returns gradient w.r.t. the input map.
  FeatureMap backward(const FeatureMap& x, const FeatureMap& dy);

  void params(ParamRefs& out) {
    out.push_back(&W);
    out.push_back(&b);
  }

 private:
  Mat im2col(const FeatureMap& x) const;
};

}  // namespace hspn::nn
