#pragma once

#include "hspn/core/mat.hpp"
#include "hspn/geometry/point_cloud.hpp"

namespace hspn {

/// Optimal bijection between two equal-size clouds. mapping[i] is the target
/// index paired with source point i; cost is the summed Euclidean length of
/// the pairing.
struct Assignment {
  std::vector<int> mapping;
  double cost = 0.0;
};

/// Largest instance the exact solver accepts (it is an O(n^3) oracle meant
/// for testing, not training).
inline constexpr int kEmdExactLimit = 512;

/// Default slack for the approximate solver: the returned matching costs at
/// most n * epsilon more than the optimum.
inline constexpr double kEmdDefaultEpsilon = 1e-5;

/// Minimum-cost bijection by the Hungarian method (exact).
/// Throws std::invalid_argument on size mismatch or empty input and
/// std::length_error above kEmdExactLimit.
Assignment emd_exact(const PointCloud& a, const PointCloud& b);

/// Near-optimal bijection by a forward auction with epsilon scaling. The
/// returned cost is feasible (never below the optimum) and within
/// n * epsilon of it. Piecewise differentiable in the point coordinates.
Assignment emd_approx_assignment(const PointCloud& a, const PointCloud& b,
                                 double epsilon = kEmdDefaultEpsilon);

/// Cost of emd_approx_assignment.
double emd_approx(const PointCloud& a, const PointCloud& b,
                  double epsilon = kEmdDefaultEpsilon);

/// emd_approx with analytic gradients accumulated into ga/gb (sized n x 3);
/// either may be null. Valid wherever the optimal matching is locally
/// constant, i.e. away from assignment ties.
double emd_approx_grad(const PointCloud& a, const PointCloud& b, Mat* ga,
                       Mat* gb, double epsilon = kEmdDefaultEpsilon);

}  // namespace hspn
