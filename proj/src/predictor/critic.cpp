#include "hspn/predictor/critic.hpp"

#include <cmath>
#include <stdexcept>

#include "hspn/kernels/kernels.hpp"

namespace hspn {

void Critic::init(Rng& rng, int expect_points) {
  expect_points_ = expect_points;
  l1_.init("critic.l1", 3, 64, rng);
  l2_.init("critic.l2", 64, 128, rng);
  l3_.init("critic.l3", 128, 256, rng);
  h1_.init("critic.h1", 256, 64, rng);
  h2_.init("critic.h2", 64, 1, rng);
}

double Critic::forward(const PointCloud& cloud, Memo* memo) const {
  if (cloud.empty()) throw std::invalid_argument("Critic: empty cloud");
  if (expect_points_ > 0 && cloud.size() != expect_points_)
    throw std::invalid_argument("Critic: expected " +
                                std::to_string(expect_points_) + " points, got " +
                                std::to_string(cloud.size()));
  Memo local;
  Memo& m = memo ? *memo : local;

  m.input.resize(cloud.size(), 3);
  m.input.d = cloud.xyz;

  m.pre1 = l1_.forward(m.input);
  const Mat a1 = nn::lrelu(m.pre1);
  m.pre2 = l2_.forward(a1);
  const Mat a2 = nn::lrelu(m.pre2);
  m.pre3 = l3_.forward(a2);
  const Mat a3 = nn::lrelu(m.pre3);

  m.argmax.assign(a3.cols, 0);
  m.pooled.resize(1, a3.cols);
  kernels::colmax(a3.data(), a3.rows, a3.cols, m.pooled.data(), m.argmax.data());

  m.hpre = h1_.forward(m.pooled);
  const Mat ha = nn::lrelu(m.hpre);
  const Mat out = h2_.forward(ha);
  m.out = out(0, 0);
  return m.out;
}

double Critic::value(const PointCloud& cloud) const { return forward(cloud, nullptr); }

Mat Critic::input_grad_from_memo(const Memo& memo) const {
  // reverse pass with unit adjoint on the scalar output, params untouched
  Mat dout(1, 1);
  dout(0, 0) = 1.0;
  Mat d = h2_.backward_input(dout);
  d = nn::lrelu_backward(memo.hpre, d);
  d = h1_.backward_input(d);

  // un-pool: route each channel's gradient to its argmax row
  Mat d3(memo.pre3.rows, memo.pre3.cols);
  for (int c = 0; c < d3.cols; ++c) d3(memo.argmax[c], c) = d(0, c);

  d3 = nn::lrelu_backward(memo.pre3, d3);
  Mat d2 = l3_.backward_input(d3);
  d2 = nn::lrelu_backward(memo.pre2, d2);
  Mat d1 = l2_.backward_input(d2);
  d1 = nn::lrelu_backward(memo.pre1, d1);
  return l1_.backward_input(d1);
}

void Critic::input_grad(const PointCloud& cloud, Mat* g) const {
  Memo memo;
  forward(cloud, &memo);
  const Mat gi = input_grad_from_memo(memo);
  for (size_t i = 0; i < gi.d.size(); ++i) g->d[i] += gi.d[i];
}

void Critic::backward_params(const Memo& memo, double coef) {
  Mat dout(1, 1);
  dout(0, 0) = coef;
  const Mat ha = nn::lrelu(memo.hpre);
  Mat d = h2_.backward(ha, dout);
  d = nn::lrelu_backward(memo.hpre, d);
  d = h1_.backward(memo.pooled, d);

  Mat d3(memo.pre3.rows, memo.pre3.cols);
  for (int c = 0; c < d3.cols; ++c) d3(memo.argmax[c], c) = d(0, c);
  d3 = nn::lrelu_backward(memo.pre3, d3);

  const Mat a2 = nn::lrelu(memo.pre2);
  Mat d2 = l3_.backward(a2, d3);
  d2 = nn::lrelu_backward(memo.pre2, d2);
  const Mat a1 = nn::lrelu(memo.pre1);
  Mat d1 = l2_.backward(a1, d2);
  d1 = nn::lrelu_backward(memo.pre1, d1);
  l1_.backward(memo.input, d1);
}

double Critic::penalty_param_grad(const Memo& memo, const Mat& g, double coef) {
  // Tangent (forward-mode) pass along direction v = g. The LeakyReLU masks
  // and pooling rows are frozen from the memo; for this piecewise-linear
  // critic that makes the tangent chain exact almost everywhere.
  Mat z1(memo.pre1.rows, memo.pre1.cols);
  kernels::gemm_nt(g.data(), l1_.W.value.data(), z1.data(), g.rows, 3,
                   l1_.W.value.rows, false);
  const Mat a1t = nn::lrelu_backward(memo.pre1, z1);  // mask multiply

  Mat z2(memo.pre2.rows, memo.pre2.cols);
  kernels::gemm_nt(a1t.data(), l2_.W.value.data(), z2.data(), a1t.rows,
                   a1t.cols, l2_.W.value.rows, false);
  const Mat a2t = nn::lrelu_backward(memo.pre2, z2);

  Mat z3(memo.pre3.rows, memo.pre3.cols);
  kernels::gemm_nt(a2t.data(), l3_.W.value.data(), z3.data(), a2t.rows,
                   a2t.cols, l3_.W.value.rows, false);
  const Mat a3t = nn::lrelu_backward(memo.pre3, z3);

  Mat pooled_t(1, a3t.cols);
  for (int c = 0; c < a3t.cols; ++c) pooled_t(0, c) = a3t(memo.argmax[c], c);

  Mat h1t(1, h1_.W.value.rows);
  kernels::gemm_nt(pooled_t.data(), h1_.W.value.data(), h1t.data(), 1,
                   pooled_t.cols, h1_.W.value.rows, false);
  const Mat hat = nn::lrelu_backward(memo.hpre, h1t);

  double s = kernels::dot(hat.data(), h2_.W.value.data(), hat.cols);

  // reverse over the tangent chain, adjoint coef on s; only the weight
  // matrices appear in it (masks are constant, biases drop out)
  // s = hat . h2.W
  for (int c = 0; c < hat.cols; ++c) h2_.W.grad(0, c) += coef * hat.d[c];
  Mat dhat(1, hat.cols);
  for (int c = 0; c < hat.cols; ++c) dhat(0, c) = coef * h2_.W.value(0, c);
  Mat dh1t = nn::lrelu_backward(memo.hpre, dhat);

  // h1t = pooled_t h1.W^T
  kernels::gemm_tn(dh1t.data(), pooled_t.data(), h1_.W.grad.data(),
                   h1_.W.value.rows, 1, h1_.W.value.cols, true);
  Mat dpooled_t(1, pooled_t.cols);
  kernels::gemm_nn(dh1t.data(), h1_.W.value.data(), dpooled_t.data(), 1,
                   dh1t.cols, h1_.W.value.cols, false);

  Mat da3t(a3t.rows, a3t.cols);
  for (int c = 0; c < a3t.cols; ++c) da3t(memo.argmax[c], c) = dpooled_t(0, c);
  Mat dz3 = nn::lrelu_backward(memo.pre3, da3t);

  kernels::gemm_tn(dz3.data(), a2t.data(), l3_.W.grad.data(), l3_.W.value.rows,
                   dz3.rows, l3_.W.value.cols, true);
  Mat da2t(a2t.rows, a2t.cols);
  kernels::gemm_nn(dz3.data(), l3_.W.value.data(), da2t.data(), dz3.rows,
                   dz3.cols, l3_.W.value.cols, false);
  Mat dz2 = nn::lrelu_backward(memo.pre2, da2t);

  kernels::gemm_tn(dz2.data(), a1t.data(), l2_.W.grad.data(), l2_.W.value.rows,
                   dz2.rows, l2_.W.value.cols, true);
  Mat da1t(a1t.rows, a1t.cols);
  kernels::gemm_nn(dz2.data(), l2_.W.value.data(), da1t.data(), dz2.rows,
                   dz2.cols, l2_.W.value.cols, false);
  Mat dz1 = nn::lrelu_backward(memo.pre1, da1t);

  kernels::gemm_tn(dz1.data(), g.data(), l1_.W.grad.data(), l1_.W.value.rows,
                   dz1.rows, l1_.W.value.cols, true);
  return s;
}

}  // namespace hspn
