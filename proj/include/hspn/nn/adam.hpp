#pragma once

#include "hspn/nn/layers.hpp"

namespace hspn::nn {

/// Adam with the usual moment defaults; one optimizer instance per network.
struct Adam {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  long step_count = 0;
  std::vector<Mat> m;
  std::vector<Mat> v;

  explicit Adam(double learning_rate = 1e-4) : lr(learning_rate) {}

  /// Applies one update from the accumulated gradients, then clears them.
  void step(const ParamRefs& params);

  void reset() {
    step_count = 0;
    m.clear();
    v.clear();
  }
};

inline void zero_grads(const ParamRefs& params) {
  for (auto* p : params) p->zero_grad();
}

/// Scale all gradients, e.g. by 1/batch.
inline void scale_grads(const ParamRefs& params, double s) {
  for (auto* p : params)
    for (auto& g : p->grad.d) g *= s;
}

}  // namespace hspn::nn
