#pragma once

#include "hspn/core/mat.hpp"
#include "hspn/geometry/point_cloud.hpp"

namespace hspn {

/// Chamfer distance: sum over both clouds of squared nearest-neighbour
/// distances into the other cloud. Symmetric in (a, b).
double chamfer(const PointCloud& a, const PointCloud& b);

/// Chamfer value plus analytic gradients w.r.t. every coordinate of both
/// clouds (valid away from nearest-neighbour ties). Gradients are
/// accumulated into ga/gb, which must be sized |a| x 3 and |b| x 3.
double chamfer_grad(const PointCloud& a, const PointCloud& b, Mat* ga, Mat* gb);

/// One-directional per-point error: errors[i] = squared distance from
/// pred[i] to its nearest ground-truth point.
std::vector<double> pc_to_pc_error(const PointCloud& pred, const PointCloud& gt);

}  // namespace hspn
