#pragma once

#include <string>
#include <vector>

#include "hspn/core/mat.hpp"
#include "hspn/core/rng.hpp"

namespace hspn::nn {

/// A named learnable tensor with its gradient accumulator.
struct Param {
  std::string name;
  Mat value;
  Mat grad;

  void init(const std::string& n, int rows, int cols) {
    name = n;
    value.resize(rows, cols);
    grad.resize(rows, cols);
  }
  void zero_grad() { grad.zero(); }
};

using ParamRefs = std::vector<Param*>;

/// Kaiming-style uniform fill: limit sqrt(6 / fan_in).
void kaiming_init(Mat& w, int fan_in, Rng& rng);

/// Fully connected map Y = X W^T + b over rows of X.
struct Linear {
  Param W;  // out x in
  Param b;  // 1 x out

  void init(const std::string& name, int in, int out, Rng& rng);
  int in_dim() const { return W.value.cols; }
  int out_dim() const { return W.value.rows; }

  Mat forward(const Mat& x) const;
  /// Accumulates parameter gradients and returns dL/dx.
  Mat backward(const Mat& x, const Mat& dy);
  /// Input gradient only (frozen parameters).
  Mat backward_input(const Mat& dy) const;

  void params(ParamRefs& out) {
    out.push_back(&W);
    out.push_back(&b);
  }
};

inline constexpr double kLeakySlope = 0.2;

/// LeakyReLU over every entry; z is the pre-activation.
Mat lrelu(const Mat& z, double slope = kLeakySlope);
Mat lrelu_backward(const Mat& z, const Mat& dy, double slope = kLeakySlope);

/// Row-wise softmax.
Mat softmax_rows(const Mat& z);
/// Backward through softmax given the forward output a = softmax(z).
Mat softmax_rows_backward(const Mat& a, const Mat& dy);

/// Max over rows (points) per column. argmax records the first maximizing
/// row for the backward scatter.
struct MaxPool {
  std::vector<int> argmax;
  Vec forward(const Mat& x);
  Mat backward(int rows, const Vec& dy) const;
};

double sigmoid(double x);

}  // namespace hspn::nn
