#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "hspn/core/rng.hpp"
#include "hspn/kernels/kernels.hpp"
#include "oracles.hpp"

using namespace hspn;

namespace {

std::vector<double> random_vec(Rng& rng, int n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("gemm variants match the scalar reference") {
#ifndef HSPN_HAVE_AVX2
  return;  // scalar-only build: nothing to compare
#else
  if (!kernels::set_backend(kernels::Backend::avx2)) return;
  Rng rng(42);
  // deliberately awkward shapes to exercise the vector tails
  const int shapes[][3] = {{1, 1, 1},   {2, 3, 5},    {7, 13, 17},
                           {16, 16, 16}, {5, 31, 33}, {33, 9, 65},
                           {64, 128, 96}, {3, 1, 19}};
  for (auto [m, k, n] : shapes) {
    for (bool acc : {false, true}) {
      auto A = random_vec(rng, m * k);
      auto Ank = random_vec(rng, n * k);
      auto Akm = random_vec(rng, k * m);
      auto B = random_vec(rng, k * n);
      auto C0 = random_vec(rng, m * n);

      auto want = C0, got = C0;
      kernels::scalar::gemm_nn(A.data(), B.data(), want.data(), m, k, n, acc);
      kernels::avx2::gemm_nn(A.data(), B.data(), got.data(), m, k, n, acc);
      CHECK(max_abs_diff(want, got) < 1e-11 * k);

      want = C0;
      got = C0;
      kernels::scalar::gemm_nt(A.data(), Ank.data(), want.data(), m, k, n, acc);
      kernels::avx2::gemm_nt(A.data(), Ank.data(), got.data(), m, k, n, acc);
      CHECK(max_abs_diff(want, got) < 1e-11 * k);

      want = C0;
      got = C0;
      kernels::scalar::gemm_tn(Akm.data(), B.data(), want.data(), m, k, n, acc);
      kernels::avx2::gemm_tn(Akm.data(), B.data(), got.data(), m, k, n, acc);
      CHECK(max_abs_diff(want, got) < 1e-11 * k);
    }
  }
#endif
}

TEST_CASE("nn_sqdist backends are bit-identical including tie indices") {
#ifdef HSPN_HAVE_AVX2
  if (!kernels::set_backend(kernels::Backend::avx2)) return;
  Rng rng(7);
  for (int na : {1, 2, 5, 33, 128}) {
    for (int nb : {1, 3, 4, 7, 64, 129}) {
      auto a = random_vec(rng, 3 * na);
      auto b = random_vec(rng, 3 * nb);
      // plant exact duplicates so ties actually occur
      if (nb >= 4) {
        b[9] = b[0];
        b[10] = b[1];
        b[11] = b[2];
      }
      std::vector<double> ds(na), dv(na);
      std::vector<int> is(na), iv(na);
      kernels::scalar::nn_sqdist(a.data(), na, b.data(), nb, ds.data(), is.data());
      kernels::avx2::nn_sqdist(a.data(), na, b.data(), nb, dv.data(), iv.data());
      for (int i = 0; i < na; ++i) {
        CHECK(ds[i] == dv[i]);
        CHECK(is[i] == iv[i]);
      }
    }
  }
#endif
}

TEST_CASE("point_sqdist and colmax backends are bit-identical") {
#ifdef HSPN_HAVE_AVX2
  if (!kernels::set_backend(kernels::Backend::avx2)) return;
  Rng rng(11);
  for (int n : {1, 4, 5, 100, 257}) {
    auto pts = random_vec(rng, 3 * n);
    double q[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
    std::vector<double> outs(n), outv(n);
    kernels::scalar::point_sqdist(pts.data(), n, q, outs.data());
    kernels::avx2::point_sqdist(pts.data(), n, q, outv.data());
    for (int i = 0; i < n; ++i) CHECK(outs[i] == outv[i]);
  }
  for (int rows : {1, 2, 17}) {
    for (int cols : {1, 3, 4, 9, 64, 130}) {
      auto m = random_vec(rng, rows * cols);
      if (rows > 1) {
        // duplicate row 0 into row 1: argmax must stay at the first row
        for (int j = 0; j < cols; ++j) m[cols + j] = m[j];
      }
      std::vector<double> os(cols), ov(cols);
      std::vector<int> as(cols), av(cols);
      kernels::scalar::colmax(m.data(), rows, cols, os.data(), as.data());
      kernels::avx2::colmax(m.data(), rows, cols, ov.data(), av.data());
      for (int j = 0; j < cols; ++j) {
        CHECK(os[j] == ov[j]);
        CHECK(as[j] == av[j]);
      }
    }
  }
#endif
}

TEST_CASE("dot and axpy backends agree") {
#ifdef HSPN_HAVE_AVX2
  if (!kernels::set_backend(kernels::Backend::avx2)) return;
  Rng rng(13);
  for (int n : {1, 3, 4, 17, 1000}) {
    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);
    CHECK(std::abs(kernels::scalar::dot(a.data(), b.data(), n) -
                   kernels::avx2::dot(a.data(), b.data(), n)) < 1e-12 * n);
    auto y1 = b, y2 = b;
    kernels::scalar::axpy(0.37, a.data(), y1.data(), n);
    kernels::avx2::axpy(0.37, a.data(), y2.data(), n);
    CHECK(max_abs_diff(y1, y2) < 1e-14 * n);
  }
#endif
}

TEST_CASE("auction_scan backends are bit-identical") {
#ifdef HSPN_HAVE_AVX2
  if (!kernels::set_backend(kernels::Backend::avx2)) return;
  Rng rng(17);
  for (int n : {1, 2, 3, 4, 5, 8, 37, 256}) {
    for (int rep = 0; rep < 20; ++rep) {
      auto benefit = random_vec(rng, n);
      auto price = random_vec(rng, n);
      if (n >= 6 && rep % 2 == 0) {
        // force an exact tie for the maximum
        benefit[5] = benefit[2] + price[5] - price[2];
      }
      int js, jv;
      double bs, bv, ss, sv;
      kernels::scalar::auction_scan(benefit.data(), price.data(), n, &js, &bs, &ss);
      kernels::avx2::auction_scan(benefit.data(), price.data(), n, &jv, &bv, &sv);
      CHECK(js == jv);
      CHECK(bs == bv);
      CHECK(ss == sv);
    }
  }
#endif
}

TEST_CASE("dispatch reports a usable backend") {
  CHECK((kernels::active_backend() == kernels::Backend::scalar ||
         kernels::active_backend() == kernels::Backend::avx2));
  CHECK(kernels::backend_name() != nullptr);
  // scalar must always be selectable
  CHECK(kernels::set_backend(kernels::Backend::scalar));
#ifdef HSPN_HAVE_AVX2
  kernels::set_backend(kernels::Backend::avx2);
#endif
}

TEST_SUITE_END();
