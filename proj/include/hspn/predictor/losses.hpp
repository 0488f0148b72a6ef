#pragma once

#include "hspn/predictor/critic.hpp"
#include "hspn/predictor/image_encoder.hpp"

namespace hspn {

struct GradientPenaltyResult {
  double penalty = 0.0;
  double grad_norm = 0.0;
  PointCloud xhat;
  Mat grad;  // d critic / d xhat
};

/// (|grad D(xhat)|_2 - 1)^2 at xhat = t*real + (1-t)*fake, t in [0,1].
GradientPenaltyResult gradient_penalty(const PointCloud& real,
                                       const PointCloud& fake,
                                       const CriticFn& critic, double t);

/// Generator-side objective for one sample:
/// lambda1*KL + lambda2*CD(generated, target) - critic_value.
double loss_predictor_g(const LatentCode& code, const PointCloud& generated,
                        const PointCloud& target_partial, double critic_value,
                        double lambda1, double lambda2);

/// Critic objective: mean(fake) - mean(real) + lambda_gp * mean(penalty).
double loss_predictor_d(const std::vector<double>& real_scores,
                        const std::vector<double>& fake_scores,
                        const std::vector<double>& penalties, double lambda_gp);

}  // namespace hspn
