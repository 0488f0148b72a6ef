#include "hspn/predictor/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "hspn/geometry/metrics.hpp"

namespace hspn {

GradientPenaltyResult gradient_penalty(const PointCloud& real,
                                       const PointCloud& fake,
                                       const CriticFn& critic, double t) {
  if (real.size() != fake.size())
    throw std::invalid_argument("gradient_penalty: size mismatch");
  if (!(t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("gradient_penalty: t outside [0,1]");

  GradientPenaltyResult res;
  res.xhat = PointCloud(real.size());
  for (size_t k = 0; k < real.xyz.size(); ++k)
    res.xhat.xyz[k] = t * real.xyz[k] + (1.0 - t) * fake.xyz[k];

  res.grad.resize(real.size(), 3);
  critic.input_grad(res.xhat, &res.grad);

  double norm2 = 0.0;
  for (double g : res.grad.d) norm2 += g * g;
  res.grad_norm = std::sqrt(norm2);
  const double excess = res.grad_norm - 1.0;
  res.penalty = excess * excess;
  return res;
}

double loss_predictor_g(const LatentCode& code, const PointCloud& generated,
                        const PointCloud& target_partial, double critic_value,
                        double lambda1, double lambda2) {
  double loss = -critic_value;
  if (lambda1 != 0.0) loss += lambda1 * kl_loss(code);
  if (lambda2 != 0.0) loss += lambda2 * chamfer(generated, target_partial);
  return loss;
}

double loss_predictor_d(const std::vector<double>& real_scores,
                        const std::vector<double>& fake_scores,
                        const std::vector<double>& penalties, double lambda_gp) {
  auto mean = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  return mean(fake_scores) - mean(real_scores) + lambda_gp * mean(penalties);
}

}  // namespace hspn
