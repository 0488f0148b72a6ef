#pragma once

#include <array>
#include <vector>

namespace hspn {

/// A set of N points in 3-space, packed as xyz triples in normalized model
/// coordinates. Ordering is meaningful only as an index labelling; all
/// metrics treat the cloud as a set.
struct PointCloud {
  std::vector<double> xyz;

  PointCloud() = default;
  explicit PointCloud(int n) : xyz(static_cast<size_t>(n) * 3, 0.0) {}

  int size() const { return static_cast<int>(xyz.size() / 3); }
  bool empty() const { return xyz.empty(); }

  double* p(int i) { return xyz.data() + 3 * static_cast<size_t>(i); }
  const double* p(int i) const { return xyz.data() + 3 * static_cast<size_t>(i); }

  void push_back(double x, double y, double z) {
    xyz.push_back(x);
    xyz.push_back(y);
    xyz.push_back(z);
  }

  std::array<double, 3> centroid() const;

  /// True when every coordinate is finite.
  bool all_finite() const;
};

struct NormalizeResult {
  PointCloud cloud;
  std::array<double, 3> centroid{0, 0, 0};
  double scale = 1.0;
  /// Set when the input had zero radius (all points identical); the output
  /// is then the centered cloud at scale 1.
  bool degenerate = false;
};

/// Center at the centroid and scale so the farthest point sits on the unit
/// sphere. Idempotent up to 1e-6.
NormalizeResult normalize(const PointCloud& cloud);

}  // namespace hspn
