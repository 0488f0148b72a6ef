#include "hspn/geometry/metrics.hpp"

#include <stdexcept>

#include "hspn/kernels/kernels.hpp"

namespace hspn {

namespace {

void require_nonempty(const PointCloud& a, const PointCloud& b, const char* op) {
  if (a.empty() || b.empty())
    throw std::invalid_argument(std::string(op) + ": empty point cloud");
}

}  // namespace

double chamfer(const PointCloud& a, const PointCloud& b) {
  require_nonempty(a, b, "chamfer");
  const int na = a.size(), nb = b.size();
  std::vector<double> dist(std::max(na, nb));
  std::vector<int> idx(std::max(na, nb));

  kernels::nn_sqdist(b.xyz.data(), nb, a.xyz.data(), na, dist.data(), idx.data());
  double sum_b = 0.0;
  for (int j = 0; j < nb; ++j) sum_b += dist[j];

  kernels::nn_sqdist(a.xyz.data(), na, b.xyz.data(), nb, dist.data(), idx.data());
  double sum_a = 0.0;
  for (int i = 0; i < na; ++i) sum_a += dist[i];

  return sum_b + sum_a;
}

double chamfer_grad(const PointCloud& a, const PointCloud& b, Mat* ga, Mat* gb) {
  require_nonempty(a, b, "chamfer_grad");
  const int na = a.size(), nb = b.size();
  std::vector<double> dist(std::max(na, nb));
  std::vector<int> idx(std::max(na, nb));
  double total = 0.0;

  // term over a: min over b; d/da_i = 2 (a_i - b_nn), d/db_nn accumulates the mirror
  kernels::nn_sqdist(a.xyz.data(), na, b.xyz.data(), nb, dist.data(), idx.data());
  for (int i = 0; i < na; ++i) {
    total += dist[i];
    const int j = idx[i];
    for (int c = 0; c < 3; ++c) {
      const double g = 2.0 * (a.xyz[3 * i + c] - b.xyz[3 * j + c]);
      if (ga) (*ga)(i, c) += g;
      if (gb) (*gb)(j, c) -= g;
    }
  }

  // term over b: min over a
  kernels::nn_sqdist(b.xyz.data(), nb, a.xyz.data(), na, dist.data(), idx.data());
  for (int j = 0; j < nb; ++j) {
    total += dist[j];
    const int i = idx[j];
    for (int c = 0; c < 3; ++c) {
      const double g = 2.0 * (b.xyz[3 * j + c] - a.xyz[3 * i + c]);
      if (gb) (*gb)(j, c) += g;
      if (ga) (*ga)(i, c) -= g;
    }
  }
  return total;
}

std::vector<double> pc_to_pc_error(const PointCloud& pred, const PointCloud& gt) {
  require_nonempty(pred, gt, "pc_to_pc_error");
  std::vector<double> errors(pred.size());
  std::vector<int> idx(pred.size());
  kernels::nn_sqdist(pred.xyz.data(), pred.size(), gt.xyz.data(), gt.size(),
                     errors.data(), idx.data());
  return errors;
}

}  // namespace hspn
