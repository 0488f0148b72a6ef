#pragma once

#include "hspn/nn/layers.hpp"
#include "hspn/sampling/sampling.hpp"

namespace hspn {

/// Attention gate block. Scores a_ij = softmax_j( f1(p_i) . f2(q_j) ),
/// update p_i <- f4( p_i + sum_j a_ij f3(q_j) ). With no q supplied the
/// block runs as self-attention (q := p). Output size always equals |p|.
class Agb {
 public:
  /// d_att is the shared score width of f1/f2.
  void init(const std::string& name, int p_width, int q_width, int d_att, Rng& rng);

  struct Memo {
    Mat p, q;
    Mat f1p, f2q, f3q;  // linear outputs
    Mat scores;         // softmax rows, |p| x |q|
    Mat mixed;          // p + scores * f3q (f4 input)
  };

  Mat forward(const Mat& p, const Mat* q, Memo* memo) const;

  struct Grads {
    Mat dp;
    Mat dq;
  };
  /// Accumulates f1..f4 parameter grads; for self-attention callers must add
  /// dq into dp themselves.
  Grads backward(const Memo& memo, const Mat& dout, bool self);

  void params(nn::ParamRefs& out) {
    f1_.params(out);
    f2_.params(out);
    f3_.params(out);
    f4_.params(out);
  }

  int p_width() const { return f4_.in_dim(); }
  int q_width() const { return f3_.in_dim(); }

 private:
  nn::Linear f1_, f2_, f3_, f4_;
};

/// Encoder feature captured for a mirrored decoding block.
struct SkipFeature {
  int level = 0;
  FeaturedCloud cloud;
};

}  // namespace hspn
