#include "hspn/kernels/kernels.hpp"

#ifdef HSPN_HAVE_AVX2

#include <immintrin.h>

#include <cstring>
#include <limits>
#include <vector>

// AVX2 variants of the inner-loop kernels. The point-set and reduction
// kernels use only mul/add/compare in the same per-element order as the
// scalar reference, so they are bit-identical to it; the matrix products
// use FMA and are equivalent up to rounding.

namespace hspn::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

}  // namespace

void gemm_nn(const double* A, const double* B, double* C, int m, int k, int n,
             bool accumulate) {
  const int n16 = n - n % 16;
  const int n4 = n - n % 4;
  for (int i = 0; i < m; ++i) {
    double* ci = C + static_cast<size_t>(i) * n;
    if (!accumulate) std::memset(ci, 0, sizeof(double) * n);
    const double* ai = A + static_cast<size_t>(i) * k;

    int j = 0;
    for (; j < n16; j += 16) {
      __m256d c0 = _mm256_loadu_pd(ci + j);
      __m256d c1 = _mm256_loadu_pd(ci + j + 4);
      __m256d c2 = _mm256_loadu_pd(ci + j + 8);
      __m256d c3 = _mm256_loadu_pd(ci + j + 12);
      for (int p = 0; p < k; ++p) {
        const __m256d a = _mm256_set1_pd(ai[p]);
        const double* bp = B + static_cast<size_t>(p) * n + j;
        c0 = _mm256_fmadd_pd(a, _mm256_loadu_pd(bp), c0);
        c1 = _mm256_fmadd_pd(a, _mm256_loadu_pd(bp + 4), c1);
        c2 = _mm256_fmadd_pd(a, _mm256_loadu_pd(bp + 8), c2);
        c3 = _mm256_fmadd_pd(a, _mm256_loadu_pd(bp + 12), c3);
      }
      _mm256_storeu_pd(ci + j, c0);
      _mm256_storeu_pd(ci + j + 4, c1);
      _mm256_storeu_pd(ci + j + 8, c2);
      _mm256_storeu_pd(ci + j + 12, c3);
    }
    for (; j < n4; j += 4) {
      __m256d c0 = _mm256_loadu_pd(ci + j);
      for (int p = 0; p < k; ++p) {
        const __m256d a = _mm256_set1_pd(ai[p]);
        c0 = _mm256_fmadd_pd(a, _mm256_loadu_pd(B + static_cast<size_t>(p) * n + j), c0);
      }
      _mm256_storeu_pd(ci + j, c0);
    }
    for (; j < n; ++j) {
      double acc = ci[j];
      for (int p = 0; p < k; ++p) acc += ai[p] * B[static_cast<size_t>(p) * n + j];
      ci[j] = acc;
    }
  }
}

void gemm_nt(const double* A, const double* B, double* C, int m, int k, int n,
             bool accumulate) {
  const int k4 = k - k % 4;
  const int n4 = n - n % 4;
  for (int i = 0; i < m; ++i) {
    const double* ai = A + static_cast<size_t>(i) * k;
    double* ci = C + static_cast<size_t>(i) * n;
    int j = 0;
    for (; j < n4; j += 4) {
      const double* b0 = B + static_cast<size_t>(j) * k;
      const double* b1 = B + static_cast<size_t>(j + 1) * k;
      const double* b2 = B + static_cast<size_t>(j + 2) * k;
      const double* b3 = B + static_cast<size_t>(j + 3) * k;
      __m256d acc0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd();
      __m256d acc2 = _mm256_setzero_pd();
      __m256d acc3 = _mm256_setzero_pd();
      int p = 0;
      for (; p < k4; p += 4) {
        const __m256d va = _mm256_loadu_pd(ai + p);
        acc0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b0 + p), acc0);
        acc1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b1 + p), acc1);
        acc2 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b2 + p), acc2);
        acc3 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b3 + p), acc3);
      }
      double s0 = hsum(acc0), s1 = hsum(acc1), s2 = hsum(acc2), s3 = hsum(acc3);
      for (; p < k; ++p) {
        const double a = ai[p];
        s0 += a * b0[p];
        s1 += a * b1[p];
        s2 += a * b2[p];
        s3 += a * b3[p];
      }
      if (accumulate) {
        ci[j] += s0;
        ci[j + 1] += s1;
        ci[j + 2] += s2;
        ci[j + 3] += s3;
      } else {
        ci[j] = s0;
        ci[j + 1] = s1;
        ci[j + 2] = s2;
        ci[j + 3] = s3;
      }
    }
    for (; j < n; ++j) {
      const double* bj = B + static_cast<size_t>(j) * k;
      __m256d acc = _mm256_setzero_pd();
      int p = 0;
      for (; p < k4; p += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(ai + p), _mm256_loadu_pd(bj + p), acc);
      double s = hsum(acc);
      for (; p < k; ++p) s += ai[p] * bj[p];
      ci[j] = accumulate ? ci[j] + s : s;
    }
  }
}

void gemm_tn(const double* A, const double* B, double* C, int m, int k, int n,
             bool accumulate) {
  if (!accumulate) std::memset(C, 0, sizeof(double) * static_cast<size_t>(m) * n);
  const int n4 = n - n % 4;
  for (int p = 0; p < k; ++p) {
    const double* ap = A + static_cast<size_t>(p) * m;
    const double* bp = B + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const __m256d a = _mm256_set1_pd(ap[i]);
      double* ci = C + static_cast<size_t>(i) * n;
      int j = 0;
      for (; j < n4; j += 4) {
        __m256d c = _mm256_loadu_pd(ci + j);
        c = _mm256_fmadd_pd(a, _mm256_loadu_pd(bp + j), c);
        _mm256_storeu_pd(ci + j, c);
      }
      const double as = ap[i];
      for (; j < n; ++j) ci[j] += as * bp[j];
    }
  }
}

void nn_sqdist(const double* a, int na, const double* b, int nb, double* dist,
               int* idx) {
  // transpose b once so four consecutive points sit in one vector lane group
  const int nb4 = (nb + 3) / 4 * 4;
  std::vector<double> bx(nb4, 1e300), by(nb4, 1e300), bz(nb4, 1e300);
  for (int j = 0; j < nb; ++j) {
    bx[j] = b[3 * j];
    by[j] = b[3 * j + 1];
    bz[j] = b[3 * j + 2];
  }
  const __m256d lane_step = _mm256_set1_pd(4.0);
  for (int i = 0; i < na; ++i) {
    const __m256d ax = _mm256_set1_pd(a[3 * i]);
    const __m256d ay = _mm256_set1_pd(a[3 * i + 1]);
    const __m256d az = _mm256_set1_pd(a[3 * i + 2]);
    __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d bidx = _mm256_set1_pd(-1.0);
    __m256d lane_idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
    for (int j = 0; j < nb4; j += 4) {
      const __m256d dx = _mm256_sub_pd(ax, _mm256_loadu_pd(bx.data() + j));
      const __m256d dy = _mm256_sub_pd(ay, _mm256_loadu_pd(by.data() + j));
      const __m256d dz = _mm256_sub_pd(az, _mm256_loadu_pd(bz.data() + j));
      // mul/add (no FMA) keeps distances bit-identical to the scalar kernel
      const __m256d d = _mm256_add_pd(
          _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
          _mm256_mul_pd(dz, dz));
      const __m256d lt = _mm256_cmp_pd(d, best, _CMP_LT_OQ);
      best = _mm256_blendv_pd(best, d, lt);
      bidx = _mm256_blendv_pd(bidx, lane_idx, lt);
      lane_idx = _mm256_add_pd(lane_idx, lane_step);
    }
    double bd[4], bi[4];
    _mm256_storeu_pd(bd, best);
    _mm256_storeu_pd(bi, bidx);
    double bestd = bd[0];
    int bestj = static_cast<int>(bi[0]);
    for (int l = 1; l < 4; ++l) {
      const int jl = static_cast<int>(bi[l]);
      if (bd[l] < bestd || (bd[l] == bestd && jl >= 0 && jl < bestj)) {
        bestd = bd[l];
        bestj = jl;
      }
    }
    dist[i] = bestd;
    idx[i] = bestj;
  }
}

void point_sqdist(const double* pts, int n, const double* q, double* out) {
  // xyz triples are not lane-aligned; gather 4 points per iteration
  const double qx = q[0], qy = q[1], qz = q[2];
  const __m256d vqx = _mm256_set1_pd(qx);
  const __m256d vqy = _mm256_set1_pd(qy);
  const __m256d vqz = _mm256_set1_pd(qz);
  const int n4 = n - n % 4;
  int i = 0;
  for (; i < n4; i += 4) {
    const double* p = pts + 3 * i;
    const __m256d px = _mm256_setr_pd(p[0], p[3], p[6], p[9]);
    const __m256d py = _mm256_setr_pd(p[1], p[4], p[7], p[10]);
    const __m256d pz = _mm256_setr_pd(p[2], p[5], p[8], p[11]);
    const __m256d dx = _mm256_sub_pd(px, vqx);
    const __m256d dy = _mm256_sub_pd(py, vqy);
    const __m256d dz = _mm256_sub_pd(pz, vqz);
    const __m256d d = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
        _mm256_mul_pd(dz, dz));
    _mm256_storeu_pd(out + i, d);
  }
  for (; i < n; ++i) {
    const double dx = pts[3 * i] - qx;
    const double dy = pts[3 * i + 1] - qy;
    const double dz = pts[3 * i + 2] - qz;
    out[i] = dx * dx + dy * dy + dz * dz;
  }
}

void colmax(const double* in, int rows, int cols, double* out, int* argmax) {
  const int c4 = cols - cols % 4;
  int j = 0;
  for (; j < c4; j += 4) {
    __m256d best = _mm256_loadu_pd(in + j);
    __m256d bidx = _mm256_setzero_pd();
    for (int r = 1; r < rows; ++r) {
      const __m256d v = _mm256_loadu_pd(in + static_cast<size_t>(r) * cols + j);
      const __m256d gt = _mm256_cmp_pd(v, best, _CMP_GT_OQ);
      best = _mm256_blendv_pd(best, v, gt);
      bidx = _mm256_blendv_pd(bidx, _mm256_set1_pd(static_cast<double>(r)), gt);
    }
    double bv[4], bi[4];
    _mm256_storeu_pd(bv, best);
    _mm256_storeu_pd(bi, bidx);
    for (int l = 0; l < 4; ++l) {
      out[j + l] = bv[l];
      argmax[j + l] = static_cast<int>(bi[l]);
    }
  }
  for (; j < cols; ++j) {
    double best = in[j];
    int bi = 0;
    for (int r = 1; r < rows; ++r) {
      const double v = in[static_cast<size_t>(r) * cols + j];
      if (v > best) {
        best = v;
        bi = r;
      }
    }
    out[j] = best;
    argmax[j] = bi;
  }
}

double dot(const double* a, const double* b, int n) {
  const int n4 = n - n % 4;
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i < n4; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, int n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const int n4 = n - n % 4;
  int i = 0;
  for (; i < n4; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void auction_scan(const double* benefit, const double* price, int n,
                  int* best_j, double* best_v, double* second_v) {
  const double ninf = -std::numeric_limits<double>::infinity();
  __m256d vbest = _mm256_set1_pd(ninf);
  __m256d vsecond = _mm256_set1_pd(ninf);
  __m256d vidx = _mm256_set1_pd(-1.0);
  __m256d lane_idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  const __m256d lane_step = _mm256_set1_pd(4.0);
  const int n4 = n - n % 4;
  int j = 0;
  for (; j < n4; j += 4) {
    const __m256d v =
        _mm256_sub_pd(_mm256_loadu_pd(benefit + j), _mm256_loadu_pd(price + j));
    const __m256d gt = _mm256_cmp_pd(v, vbest, _CMP_GT_OQ);
    // demoted best becomes a second-best candidate; otherwise v competes
    const __m256d cand = _mm256_blendv_pd(v, vbest, gt);
    vsecond = _mm256_max_pd(vsecond, cand);
    vbest = _mm256_blendv_pd(vbest, v, gt);
    vidx = _mm256_blendv_pd(vidx, lane_idx, gt);
    lane_idx = _mm256_add_pd(lane_idx, lane_step);
  }
  double bv[4], bi[4], sv[4];
  _mm256_storeu_pd(bv, vbest);
  _mm256_storeu_pd(bi, vidx);
  _mm256_storeu_pd(sv, vsecond);

  double best = ninf, second = ninf;
  int bj = -1;
  for (int l = 0; l < 4; ++l) {
    if (bi[l] < 0) continue;
    const int jl = static_cast<int>(bi[l]);
    if (bv[l] > best || (bv[l] == best && jl < bj)) {
      if (best > second) second = best;
      best = bv[l];
      bj = jl;
    } else if (bv[l] > second) {
      second = bv[l];
    }
    if (sv[l] > second) second = sv[l];
  }
  for (; j < n; ++j) {
    const double v = benefit[j] - price[j];
    if (v > best) {
      second = best;
      best = v;
      bj = j;
    } else if (v > second) {
      second = v;
    }
  }
  *best_j = bj;
  *best_v = best;
  *second_v = second;
}

}  // namespace hspn::kernels::avx2

#endif  // HSPN_HAVE_AVX2
