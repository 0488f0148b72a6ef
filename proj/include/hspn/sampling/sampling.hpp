#pragma once

#include <vector>

#include "hspn/core/mat.hpp"
#include "hspn/geometry/point_cloud.hpp"

namespace hspn {

/// Points paired with per-point feature vectors. width 0 means coordinates
/// only (the features matrix then has zero columns).
struct FeaturedCloud {
  PointCloud points;
  Mat features;  // points.size() x C

  FeaturedCloud() = default;
  FeaturedCloud(PointCloud pts, Mat feat)
      : points(std::move(pts)), features(std::move(feat)) {}

  int size() const { return points.size(); }
  int width() const { return features.cols; }
};

struct GroupingSpec {
  int npoint = 1;
  double radius = 0.2;  // <= 0 means unbounded (global grouping)
  int kmax = 16;
  std::vector<int> mlp_widths;

  void validate(int cloud_size) const;
};

/// Greedy max-min farthest point sampling. Returns m distinct indices,
/// deterministic given seed_index; argmax ties resolve to the lowest index.
std::vector<int> farthest_point_sample(const PointCloud& cloud, int m,
                                       int seed_index = 0);

/// Value-based seed choice (farthest from the centroid, coordinate-
/// lexicographic on ties) so downstream features do not depend on the
/// input ordering.
int canonical_seed_index(const PointCloud& cloud);

/// For each center: up to kmax member indices within radius, nearest first,
/// padded to exactly kmax by repeating the first member. A center with an
/// empty ball falls back to its single nearest point.
std::vector<std::vector<int>> ball_query(const PointCloud& centers,
                                         const PointCloud& cloud,
                                         const GroupingSpec& spec);

}  // namespace hspn
