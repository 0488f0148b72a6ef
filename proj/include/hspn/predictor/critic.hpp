#pragma once

#include "hspn/geometry/point_cloud.hpp"
#include "hspn/nn/layers.hpp"

namespace hspn {

/// Anything that can score a cloud and expose the gradient of that score
/// w.r.t. the input coordinates. The gradient-penalty machinery and its
/// tests are written against this interface.
class CriticFn {
 public:
  virtual ~CriticFn() = default;
  virtual double value(const PointCloud& cloud) const = 0;
  /// g must be size() x 3; the gradient is accumulated into it.
  virtual void input_grad(const PointCloud& cloud, Mat* g) const = 0;
};

/// WGAN critic: shared per-point map 3 -> 64 -> 128 -> 256, max-pool over
/// points, dense head 256 -> 64 -> 1. Permutation invariant by construction.
class Critic : public CriticFn {
 public:
  void init(Rng& rng, int expect_points = -1);

  struct Memo {
    Mat input;                 // n x 3
    Mat pre1, pre2, pre3;      // per-point pre-activations
    std::vector<int> argmax;   // pooling rows per channel
    Mat pooled;                // 1 x 256
    Mat hpre;                  // 1 x 64
    double out = 0.0;
  };

  double forward(const PointCloud& cloud, Memo* memo) const;
  double value(const PointCloud& cloud) const override;
  void input_grad(const PointCloud& cloud, Mat* g) const override;

  /// d(out)=coef: accumulate parameter gradients for a plain critic score.
  void backward_params(const Memo& memo, double coef);

  /// Input gradient recomputed from a stored memo.
  Mat input_grad_from_memo(const Memo& memo) const;

  /// Accumulates d(penalty)/d(params) for penalty = (|g|_2 - 1)^2 at the
  /// memo's input, scaled by coef. g must be the memo's input gradient.
  /// Returns the tangent-mode recomputation of |g|^2 (an internal identity
  /// used by tests).
  double penalty_param_grad(const Memo& memo, const Mat& g, double coef);

  void params(nn::ParamRefs& out) {
    l1_.params(out);
    l2_.params(out);
    l3_.params(out);
    h1_.params(out);
    h2_.params(out);
  }

 private:
  int expect_points_ = -1;
  nn::Linear l1_, l2_, l3_, h1_, h2_;
};

}  // namespace hspn
