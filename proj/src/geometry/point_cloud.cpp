#include "hspn/geometry/point_cloud.hpp"

#include <cmath>
#include <stdexcept>

namespace hspn {

std::array<double, 3> PointCloud::centroid() const {
  std::array<double, 3> c{0, 0, 0};
  const int n = size();
  for (int i = 0; i < n; ++i) {
    c[0] += xyz[3 * i];
    c[1] += xyz[3 * i + 1];
    c[2] += xyz[3 * i + 2];
  }
  c[0] /= n;
  c[1] /= n;
  c[2] /= n;
  return c;
}

bool PointCloud::all_finite() const {
  for (double v : xyz)
    if (!std::isfinite(v)) return false;
  return true;
}

NormalizeResult normalize(const PointCloud& cloud) {
  if (cloud.empty()) throw std::invalid_argument("normalize: empty point cloud");

  NormalizeResult res;
  res.centroid = cloud.centroid();
  const int n = cloud.size();

  double max_r2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = cloud.xyz[3 * i] - res.centroid[0];
    const double dy = cloud.xyz[3 * i + 1] - res.centroid[1];
    const double dz = cloud.xyz[3 * i + 2] - res.centroid[2];
    const double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 > max_r2) max_r2 = r2;
  }

  res.degenerate = max_r2 == 0.0;
  res.scale = res.degenerate ? 1.0 : std::sqrt(max_r2);

  res.cloud = PointCloud(n);
  const double inv = 1.0 / res.scale;
  for (int i = 0; i < n; ++i) {
    res.cloud.xyz[3 * i] = (cloud.xyz[3 * i] - res.centroid[0]) * inv;
    res.cloud.xyz[3 * i + 1] = (cloud.xyz[3 * i + 1] - res.centroid[1]) * inv;
    res.cloud.xyz[3 * i + 2] = (cloud.xyz[3 * i + 2] - res.centroid[2]) * inv;
  }
  return res;
}

}  // namespace hspn
