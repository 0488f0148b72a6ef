// Independent brute-force oracles used to freeze expected values. These must
// stay free of the implementation paths they check: everything here is plain
// double loops over the raw coordinates.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "hspn/core/rng.hpp"
#include "hspn/geometry/point_cloud.hpp"

namespace oracle {

inline double sqdist3(const double* p, const double* q) {
  const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
  return dx * dx + dy * dy + dz * dz;
}

inline double dist3(const double* p, const double* q) {
  return std::sqrt(sqdist3(p, q));
}

/// O(N*M) double-loop Chamfer distance.
inline double chamfer(const hspn::PointCloud& a, const hspn::PointCloud& b) {
  double total = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < b.size(); ++j) best = std::min(best, sqdist3(a.p(i), b.p(j)));
    total += best;
  }
  for (int j = 0; j < b.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < a.size(); ++i) best = std::min(best, sqdist3(b.p(j), a.p(i)));
    total += best;
  }
  return total;
}

/// Per-point squared nearest-neighbour distance, prediction -> ground truth.
inline std::vector<double> per_point_min(const hspn::PointCloud& pred,
                                         const hspn::PointCloud& gt) {
  std::vector<double> out(pred.size());
  for (int i = 0; i < pred.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < gt.size(); ++j) best = std::min(best, sqdist3(pred.p(i), gt.p(j)));
    out[i] = best;
  }
  return out;
}

/// Exhaustive optimal assignment by permutation enumeration (n <= 9 or so).
inline double exhaustive_emd(const hspn::PointCloud& a, const hspn::PointCloud& b) {
  const int n = a.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += dist3(a.p(i), b.p(perm[i]));
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Greedy max-min farthest point sampling, O(N*m), by definition.
inline std::vector<int> fps(const hspn::PointCloud& cloud, int m, int seed_index) {
  const int n = cloud.size();
  std::vector<int> chosen{seed_index};
  std::vector<double> dmin(n);
  for (int i = 0; i < n; ++i) dmin[i] = sqdist3(cloud.p(i), cloud.p(seed_index));
  while (static_cast<int>(chosen.size()) < m) {
    int best = -1;
    double bestd = -1.0;
    for (int i = 0; i < n; ++i) {
      if (dmin[i] > bestd) {
        bestd = dmin[i];
        best = i;
      }
    }
    chosen.push_back(best);
    for (int i = 0; i < n; ++i) dmin[i] = std::min(dmin[i], sqdist3(cloud.p(i), cloud.p(best)));
  }
  return chosen;
}

/// All indices within radius of the center (unsorted membership filter).
inline std::vector<int> ball_members(const hspn::PointCloud& cloud, const double* center,
                                     double radius) {
  std::vector<int> out;
  for (int i = 0; i < cloud.size(); ++i)
    if (sqdist3(cloud.p(i), center) <= radius * radius) out.push_back(i);
  return out;
}

/// Central finite difference of a scalar function at x along one coordinate.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Relative error with an absolute floor for near-zero gradients.
inline double rel_err(double got, double want, double floor = 1e-8) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

/// Gradient comparison with mixed tolerance: parameters whose true gradient
/// is structurally zero make the FD reference pure round-off noise, so an
/// absolute floor is required alongside the 1e-4 relative bound.
inline bool grad_close(double got, double fd, double rel = 1e-4, double abs = 1e-6) {
  return std::abs(got - fd) <= abs + rel * std::max(std::abs(got), std::abs(fd));
}

/// KL(N(mu, e^logvar) || N(0,1)) by trapezoid quadrature, one dimension.
inline double kl_quadrature_1d(double mu, double log_var) {
  const double sigma = std::exp(0.5 * log_var);
  const double lo = std::min(mu - 12.0 * sigma, -12.0);
  const double hi = std::max(mu + 12.0 * sigma, 12.0);
  const int steps = 200000;
  const double dx = (hi - lo) / steps;
  auto log_q = [&](double x) {
    const double t = (x - mu) / sigma;
    return -0.5 * t * t - std::log(sigma) - 0.918938533204672742;  // log sqrt(2pi)
  };
  auto log_p = [](double x) { return -0.5 * x * x - 0.918938533204672742; };
  double acc = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double x = lo + i * dx;
    const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    const double lq = log_q(x);
    acc += w * std::exp(lq) * (lq - log_p(x));
  }
  return acc * dx;
}

inline hspn::PointCloud random_cloud(hspn::Rng& rng, int n, double scale = 1.0) {
  hspn::PointCloud c(n);
  for (size_t k = 0; k < c.xyz.size(); ++k) c.xyz[k] = rng.uniform(-scale, scale);
  return c;
}

inline hspn::PointCloud gaussian_cloud(hspn::Rng& rng, int n, double scale = 1.0) {
  hspn::PointCloud c(n);
  for (size_t k = 0; k < c.xyz.size(); ++k) c.xyz[k] = scale * rng.normal();
  return c;
}

}  // namespace oracle
