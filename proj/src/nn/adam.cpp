#include "hspn/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace hspn::nn {

void Adam::step(const ParamRefs& params) {
  if (m.empty()) {
    for (auto* p : params) {
      m.emplace_back(p->value.rows, p->value.cols);
      v.emplace_back(p->value.rows, p->value.cols);
    }
  }
  if (m.size() != params.size())
    throw std::invalid_argument("Adam: parameter list changed size");

  ++step_count;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));

  for (size_t k = 0; k < params.size(); ++k) {
    Param& p = *params[k];
    double* mv = m[k].data();
    double* vv = v[k].data();
    for (size_t i = 0; i < p.value.d.size(); ++i) {
      const double g = p.grad.d[i];
      mv[i] = beta1 * mv[i] + (1.0 - beta1) * g;
      vv[i] = beta2 * vv[i] + (1.0 - beta2) * g * g;
      const double mhat = mv[i] / bc1;
      const double vhat = vv[i] / bc2;
      p.value.d[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
    p.zero_grad();
  }
}

}  // namespace hspn::nn
