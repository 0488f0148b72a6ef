#include "hspn/geometry/emd.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hspn/kernels/kernels.hpp"

namespace hspn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pair(const PointCloud& a, const PointCloud& b, const char* op) {
  if (a.empty() || b.empty())
    throw std::invalid_argument(std::string(op) + ": empty point cloud");
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(op) + ": size mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
}

double euclid(const double* p, const double* q) {
  const double dx = p[0] - q[0];
  const double dy = p[1] - q[1];
  const double dz = p[2] - q[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Mat cost_matrix(const PointCloud& a, const PointCloud& b) {
  const int n = a.size();
  Mat c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = euclid(a.p(i), b.p(j));
  return c;
}

double mapping_cost(const PointCloud& a, const PointCloud& b,
                    const std::vector<int>& mapping) {
  double total = 0.0;
  for (int i = 0; i < a.size(); ++i) total += euclid(a.p(i), b.p(mapping[i]));
  return total;
}

}  // namespace

Assignment emd_exact(const PointCloud& a, const PointCloud& b) {
  check_pair(a, b, "emd_exact");
  const int n = a.size();
  if (n > kEmdExactLimit)
    throw std::length_error("emd_exact: size " + std::to_string(n) +
                            " exceeds oracle limit " +
                            std::to_string(kEmdExactLimit));

  const Mat c = cost_matrix(a, b);

  // Hungarian method with row/column potentials and shortest augmenting
  // paths; 1-based bookkeeping, column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment res;
  res.mapping.assign(n, -1);
  for (int j = 1; j <= n; ++j) res.mapping[p[j] - 1] = j - 1;
  res.cost = mapping_cost(a, b, res.mapping);
  return res;
}

Assignment emd_approx_assignment(const PointCloud& a, const PointCloud& b,
                                 double epsilon) {
  check_pair(a, b, "emd_approx");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("emd_approx: epsilon must be positive");
  const int n = a.size();

  // benefit[i][j] = -cost so the auction maximizes
  Mat benefit(n, n);
  double cmax = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d = euclid(a.p(i), b.p(j));
      benefit(i, j) = -d;
      if (d > cmax) cmax = d;
    }

  std::vector<double> price(n, 0.0);
  std::vector<int> owner_of(n, -1);   // object -> person
  std::vector<int> object_of(n, -1);  // person -> object
  std::vector<int> queue;
  queue.reserve(n);

  // epsilon scaling: successive auctions at shrinking slack, prices kept
  double eps = std::max(cmax / 4.0, epsilon);
  bool last_round = eps <= epsilon;
  for (;;) {
    std::fill(owner_of.begin(), owner_of.end(), -1);
    std::fill(object_of.begin(), object_of.end(), -1);
    queue.clear();
    for (int i = n - 1; i >= 0; --i) queue.push_back(i);

    while (!queue.empty()) {
      const int person = queue.back();
      queue.pop_back();
      int j;
      double best, second;
      kernels::auction_scan(benefit.row(person), price.data(), n, &j, &best,
                            &second);
      // single-object case: bid unopposed
      if (second == -kInf) second = best;
      price[j] += best - second + eps;
      const int prev = owner_of[j];
      if (prev >= 0) {
        object_of[prev] = -1;
        queue.push_back(prev);
      }
      owner_of[j] = person;
      object_of[person] = j;
    }

    if (last_round) break;
    eps /= 4.0;
    if (eps <= epsilon) {
      eps = epsilon;
      last_round = true;
    }
  }

  Assignment res;
  res.mapping = object_of;
  res.cost = mapping_cost(a, b, res.mapping);
  return res;
}

double emd_approx(const PointCloud& a, const PointCloud& b, double epsilon) {
  return emd_approx_assignment(a, b, epsilon).cost;
}

double emd_approx_grad(const PointCloud& a, const PointCloud& b, Mat* ga,
                       Mat* gb, double epsilon) {
  const Assignment asg = emd_approx_assignment(a, b, epsilon);
  for (int i = 0; i < a.size(); ++i) {
    const int j = asg.mapping[i];
    const double d = euclid(a.p(i), b.p(j));
    if (d == 0.0) continue;  // coincident pair: subgradient 0
    for (int c = 0; c < 3; ++c) {
      const double g = (a.xyz[3 * i + c] - b.xyz[3 * j + c]) / d;
      if (ga) (*ga)(i, c) += g;
      if (gb) (*gb)(j, c) -= g;
    }
  }
  return asg.cost;
}

}  // namespace hspn
