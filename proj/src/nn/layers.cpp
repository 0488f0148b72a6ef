#include "hspn/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "hspn/kernels/kernels.hpp"

namespace hspn::nn {

void kaiming_init(Mat& w, int fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / fan_in);
  for (auto& v : w.d) v = rng.uniform(-limit, limit);
}

void Linear::init(const std::string& name, int in, int out, Rng& rng) {
  W.init(name + ".W", out, in);
  b.init(name + ".b", 1, out);
  kaiming_init(W.value, in, rng);
  // nonzero bias keeps structurally-zero inputs (e.g. a ball centered on
  // its own query point) off the activation kink
  const double limit = 1.0 / std::sqrt(static_cast<double>(in));
  for (auto& v : b.value.d) v = rng.uniform(-limit, limit);
}

Mat Linear::forward(const Mat& x) const {
  if (x.cols != W.value.cols)
    throw std::invalid_argument(W.name + ": input width " + std::to_string(x.cols) +
                                " != " + std::to_string(W.value.cols));
  Mat y(x.rows, W.value.rows);
  kernels::gemm_nt(x.data(), W.value.data(), y.data(), x.rows, x.cols,
                   W.value.rows, false);
  for (int i = 0; i < y.rows; ++i)
    kernels::axpy(1.0, b.value.data(), y.row(i), y.cols);
  return y;
}

Mat Linear::backward(const Mat& x, const Mat& dy) {
  // dW += dy^T x ; db += column sums of dy
  kernels::gemm_tn(dy.data(), x.data(), W.grad.data(), W.value.rows, dy.rows,
                   W.value.cols, true);
  for (int i = 0; i < dy.rows; ++i)
    kernels::axpy(1.0, dy.row(i), b.grad.data(), dy.cols);
  return backward_input(dy);
}

Mat Linear::backward_input(const Mat& dy) const {
  Mat dx(dy.rows, W.value.cols);
  kernels::gemm_nn(dy.data(), W.value.data(), dx.data(), dy.rows, dy.cols,
                   W.value.cols, false);
  return dx;
}

Mat lrelu(const Mat& z, double slope) {
  Mat y = z;
  for (auto& v : y.d)
    if (v < 0.0) v *= slope;
  return y;
}

Mat lrelu_backward(const Mat& z, const Mat& dy, double slope) {
  Mat dx = dy;
  for (size_t i = 0; i < dx.d.size(); ++i)
    if (z.d[i] < 0.0) dx.d[i] *= slope;
  return dx;
}

Mat softmax_rows(const Mat& z) {
  Mat a(z.rows, z.cols);
  for (int i = 0; i < z.rows; ++i) {
    const double* zi = z.row(i);
    double* ai = a.row(i);
    double mx = zi[0];
    for (int j = 1; j < z.cols; ++j) mx = std::max(mx, zi[j]);
    double sum = 0.0;
    for (int j = 0; j < z.cols; ++j) {
      ai[j] = std::exp(zi[j] - mx);
      sum += ai[j];
    }
    const double inv = 1.0 / sum;
    for (int j = 0; j < z.cols; ++j) ai[j] *= inv;
  }
  return a;
}

Mat softmax_rows_backward(const Mat& a, const Mat& dy) {
  Mat dz(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    const double* di = dy.row(i);
    const double inner = kernels::dot(ai, di, a.cols);
    double* out = dz.row(i);
    for (int j = 0; j < a.cols; ++j) out[j] = ai[j] * (di[j] - inner);
  }
  return dz;
}

Vec MaxPool::forward(const Mat& x) {
  Vec out(x.cols);
  argmax.assign(x.cols, 0);
  kernels::colmax(x.data(), x.rows, x.cols, out.data(), argmax.data());
  return out;
}

Mat MaxPool::backward(int rows, const Vec& dy) const {
  Mat dx(rows, static_cast<int>(dy.size()));
  for (size_t j = 0; j < dy.size(); ++j) dx(argmax[j], static_cast<int>(j)) = dy[j];
  return dx;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace hspn::nn
