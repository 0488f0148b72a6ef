#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace hspn {

/// Dense row-major matrix of doubles. The single numeric currency of the
/// project: layers, metrics and kernels all operate on (rows x cols) blocks
/// of this layout.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> d;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), d(static_cast<size_t>(r) * c, 0.0) {}
  Mat(int r, int c, double fill)
      : rows(r), cols(c), d(static_cast<size_t>(r) * c, fill) {}

  double& operator()(int i, int j) { return d[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return d[static_cast<size_t>(i) * cols + j]; }

  double* data() { return d.data(); }
  const double* data() const { return d.data(); }
  double* row(int i) { return d.data() + static_cast<size_t>(i) * cols; }
  const double* row(int i) const { return d.data() + static_cast<size_t>(i) * cols; }

  size_t size() const { return d.size(); }
  bool empty() const { return d.empty(); }

  void zero() { std::fill(d.begin(), d.end(), 0.0); }
  void resize(int r, int c) {
    rows = r;
    cols = c;
    d.assign(static_cast<size_t>(r) * c, 0.0);
  }
};

using Vec = std::vector<double>;

}  // namespace hspn
