#include <cmath>

#include "doctest.h"
#include "hspn/core/rng.hpp"
#include "hspn/nn/adam.hpp"
#include "hspn/nn/conv2d.hpp"
#include "hspn/nn/layers.hpp"
#include "oracles.hpp"

using namespace hspn;

TEST_SUITE_BEGIN("nn");

TEST_CASE("linear forward/backward against finite differences") {
  Rng rng(1);
  nn::Linear lin;
  lin.init("lin", 7, 5, rng);
  Mat x(4, 7);
  for (auto& v : x.d) v = rng.uniform(-1, 1);
  Mat w(4, 5);
  for (auto& v : w.d) v = rng.uniform(-1, 1);

  auto objective = [&]() {
    const Mat y = lin.forward(x);
    double s = 0.0;
    for (size_t i = 0; i < y.d.size(); ++i) s += w.d[i] * y.d[i];
    return s;
  };

  nn::ParamRefs ps;
  lin.params(ps);
  nn::zero_grads(ps);
  const Mat dx = lin.backward(x, w);

  for (int t = 0; t < 10; ++t) {
    const size_t k = rng.uniform_index(x.d.size());
    const double fd = oracle::central_diff(
        [&](double v) {
          Mat probe = x;
          probe.d[k] = v;
          const Mat y = lin.forward(probe);
          double s = 0.0;
          for (size_t i = 0; i < y.d.size(); ++i) s += w.d[i] * y.d[i];
          return s;
        },
        x.d[k]);
    CHECK(oracle::grad_close(dx.d[k], fd));
  }
  for (auto* p : ps) {
    for (int t = 0; t < 4; ++t) {
      const size_t k = rng.uniform_index(p->value.d.size());
      const double fd = oracle::central_diff(
          [&](double v) {
            const double saved = p->value.d[k];
            p->value.d[k] = v;
            const double s = objective();
            p->value.d[k] = saved;
            return s;
          },
          p->value.d[k]);
      CHECK(oracle::grad_close(p->grad.d[k], fd));
    }
  }

  CHECK_THROWS_AS(lin.forward(Mat(3, 6)), std::invalid_argument);
}

TEST_CASE("softmax rows: stochastic output and correct backward") {
  Rng rng(2);
  Mat z(5, 9);
  for (auto& v : z.d) v = rng.uniform(-4, 4);
  const Mat a = nn::softmax_rows(z);
  for (int i = 0; i < a.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols; ++j) {
      CHECK(a(i, j) > 0.0);
      s += a(i, j);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }

  Mat w(5, 9);
  for (auto& v : w.d) v = rng.uniform(-1, 1);
  const Mat dz = nn::softmax_rows_backward(a, w);
  for (int t = 0; t < 12; ++t) {
    const size_t k = rng.uniform_index(z.d.size());
    const double fd = oracle::central_diff(
        [&](double v) {
          Mat probe = z;
          probe.d[k] = v;
          const Mat aa = nn::softmax_rows(probe);
          double s = 0.0;
          for (size_t i = 0; i < aa.d.size(); ++i) s += w.d[i] * aa.d[i];
          return s;
        },
        z.d[k]);
    CHECK(oracle::grad_close(dz.d[k], fd));
  }
}

TEST_CASE("maxpool forward/backward") {
  Rng rng(3);
  Mat x(6, 4);
  for (auto& v : x.d) v = rng.uniform(-1, 1);
  nn::MaxPool pool;
  const Vec out = pool.forward(x);
  for (int j = 0; j < 4; ++j) {
    double best = x(0, j);
    for (int i = 1; i < 6; ++i) best = std::max(best, x(i, j));
    CHECK(out[j] == best);
  }
  Vec dy{1.0, 2.0, 3.0, 4.0};
  const Mat dx = pool.backward(6, dy);
  double total = 0.0;
  for (double v : dx.d) total += v;
  CHECK(total == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("conv2d matches finite differences") {
  Rng rng(4);
  nn::Conv2d conv;
  conv.init("c", 2, 3, rng);
  nn::FeatureMap x(9, 11, 2);
  for (auto& v : x.data.d) v = rng.uniform(-1, 1);
  const nn::FeatureMap y = conv.forward(x);
  CHECK(y.h == 5);
  CHECK(y.w == 6);
  CHECK(y.channels() == 3);

  nn::FeatureMap w(y.h, y.w, 3);
  for (auto& v : w.data.d) v = rng.uniform(-1, 1);
  auto objective = [&](const nn::FeatureMap& in) {
    const nn::FeatureMap out = conv.forward(in);
    double s = 0.0;
    for (size_t i = 0; i < out.data.d.size(); ++i) s += w.data.d[i] * out.data.d[i];
    return s;
  };

  nn::ParamRefs ps;
  conv.params(ps);
  nn::zero_grads(ps);
  const nn::FeatureMap dx = conv.backward(x, w);

  for (int t = 0; t < 10; ++t) {
    const size_t k = rng.uniform_index(x.data.d.size());
    const double fd = oracle::central_diff(
        [&](double v) {
          nn::FeatureMap probe = x;
          probe.data.d[k] = v;
          return objective(probe);
        },
        x.data.d[k]);
    CHECK(oracle::grad_close(dx.data.d[k], fd));
  }
  for (auto* p : ps) {
    for (int t = 0; t < 4; ++t) {
      const size_t k = rng.uniform_index(p->value.d.size());
      const double fd = oracle::central_diff(
          [&](double v) {
            const double saved = p->value.d[k];
            p->value.d[k] = v;
            const double s = objective(x);
            p->value.d[k] = saved;
            return s;
          },
          p->value.d[k]);
      CHECK(oracle::grad_close(p->grad.d[k], fd));
    }
  }
}

TEST_CASE("adam descends a quadratic") {
  nn::Param p;
  p.init("p", 1, 4);
  p.value.d = {3.0, -2.0, 1.5, -0.5};
  nn::Adam opt(0.05);
  nn::ParamRefs ps{&p};
  for (int step = 0; step < 400; ++step) {
    for (size_t i = 0; i < 4; ++i) p.grad.d[i] = 2.0 * p.value.d[i];
    opt.step(ps);
  }
  for (double v : p.value.d) CHECK(std::abs(v) < 1e-2);
  // step() clears gradients
  for (double g : p.grad.d) CHECK(g == 0.0);
}

TEST_SUITE_END();
