#include "hspn/sampling/sampling.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "hspn/kernels/kernels.hpp"

namespace hspn {

void GroupingSpec::validate(int cloud_size) const {
  if (npoint < 1 || npoint > cloud_size)
    throw std::invalid_argument("GroupingSpec: npoint " + std::to_string(npoint) +
                                " out of range for cloud of " +
                                std::to_string(cloud_size));
  if (kmax < 1) throw std::invalid_argument("GroupingSpec: kmax must be >= 1");
}

std::vector<int> farthest_point_sample(const PointCloud& cloud, int m,
                                       int seed_index) {
  const int n = cloud.size();
  if (m < 1 || m > n)
    throw std::invalid_argument("farthest_point_sample: m " + std::to_string(m) +
                                " out of range for cloud of " + std::to_string(n));
  if (seed_index < 0 || seed_index >= n)
    throw std::invalid_argument("farthest_point_sample: bad seed index");

  std::vector<int> chosen;
  chosen.reserve(m);
  chosen.push_back(seed_index);

  std::vector<double> dmin(n), dnew(n);
  kernels::point_sqdist(cloud.xyz.data(), n, cloud.p(seed_index), dmin.data());

  while (static_cast<int>(chosen.size()) < m) {
    int best = 0;
    double bestd = dmin[0];
    for (int i = 1; i < n; ++i) {
      if (dmin[i] > bestd) {
        bestd = dmin[i];
        best = i;
      }
    }
    chosen.push_back(best);
    kernels::point_sqdist(cloud.xyz.data(), n, cloud.p(best), dnew.data());
    for (int i = 0; i < n; ++i) dmin[i] = std::min(dmin[i], dnew[i]);
  }
  return chosen;
}

int canonical_seed_index(const PointCloud& cloud) {
  const auto c = cloud.centroid();
  std::vector<double> d(cloud.size());
  kernels::point_sqdist(cloud.xyz.data(), cloud.size(), c.data(), d.data());
  int best = 0;
  for (int i = 1; i < cloud.size(); ++i) {
    if (d[i] > d[best]) {
      best = i;
    } else if (d[i] == d[best]) {
      const double* a = cloud.p(i);
      const double* b = cloud.p(best);
      if (std::lexicographical_compare(a, a + 3, b, b + 3)) best = i;
    }
  }
  return best;
}

std::vector<std::vector<int>> ball_query(const PointCloud& centers,
                                         const PointCloud& cloud,
                                         const GroupingSpec& spec) {
  spec.validate(cloud.size());
  const int n = cloud.size();
  const double r2 = spec.radius > 0.0 ? spec.radius * spec.radius
                                      : std::numeric_limits<double>::infinity();

  std::vector<std::vector<int>> groups(centers.size());
  std::vector<double> d(n);
  std::vector<std::pair<double, int>> members;
  for (int c = 0; c < centers.size(); ++c) {
    kernels::point_sqdist(cloud.xyz.data(), n, centers.p(c), d.data());
    members.clear();
    for (int i = 0; i < n; ++i)
      if (d[i] <= r2) members.emplace_back(d[i], i);

    if (members.empty()) {
      // degenerate ball: nearest point stands in
      int nearest = 0;
      for (int i = 1; i < n; ++i)
        if (d[i] < d[nearest]) nearest = i;
      members.emplace_back(d[nearest], nearest);
    }

    // overflow keeps the nearest kmax so membership ignores input order
    std::sort(members.begin(), members.end());
    if (static_cast<int>(members.size()) > spec.kmax) members.resize(spec.kmax);

    auto& g = groups[c];
    g.reserve(spec.kmax);
    for (const auto& [dist, i] : members) g.push_back(i);
    while (static_cast<int>(g.size()) < spec.kmax) g.push_back(g.front());
  }
  return groups;
}

}  // namespace hspn
