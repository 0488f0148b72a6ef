#pragma once

#include "hspn/core/rng.hpp"
#include "hspn/nn/conv2d.hpp"
#include "hspn/nn/layers.hpp"

namespace hspn {

inline constexpr int kLatentDim = 96;
inline constexpr int kSliceH = 91;
inline constexpr int kSliceW = 109;

/// Gaussian latent code produced from an image stack. z is the
/// reparameterized sample z = mu + exp(log_var/2) * eps with the noise
/// recorded alongside.
struct LatentCode {
  Vec mu;
  Vec log_var;
  Vec eps;
  Vec z;
};

/// Small strided-convolution encoder standing in for the image backbone:
/// k input slices -> 4 conv stages -> dense -> (mu, log_var).
class ImageEncoder {
 public:
  void init(int in_slices, Rng& rng);
  int slices() const { return in_slices_; }

  struct Memo {
    nn::FeatureMap input;
    std::vector<nn::FeatureMap> pre;  // conv pre-activations
    Mat flat;                         // 1 x (6*7*128)
    Mat fc_pre;                       // 1 x 256
    Mat head_out;                     // 1 x 192
  };

  /// images: (91*109) x k pixel-major stack with values in [0,1].
  /// When sample is true, z = mu + sigma*eps with eps ~ N(0,1) from rng;
  /// otherwise z = mu and eps = 0.
  LatentCode encode(const Mat& images, Rng& rng, bool sample, Memo* memo) const;

  /// Backward from gradients on (mu, log_var); accumulates parameter grads
  /// and optionally the image gradient (same shape as the input stack).
  void backward(const Memo& memo, const Vec& dmu, const Vec& dlog_var,
                Mat* dimage);

  void params(nn::ParamRefs& out) {
    for (auto& c : conv_) c.params(out);
    fc_.params(out);
    head_.params(out);
  }

  nn::Linear& head() { return head_; }

 private:
  int in_slices_ = 1;
  nn::Conv2d conv_[4];
  nn::Linear fc_;
  nn::Linear head_;
};

/// KL(N(mu, diag e^log_var) || N(0, I)).
double kl_loss(const LatentCode& code);

/// Accumulate coef * dKL into (dmu, dlog_var).
void kl_loss_grad(const LatentCode& code, double coef, Vec* dmu, Vec* dlog_var);

}  // namespace hspn
