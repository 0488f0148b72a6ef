#include "hspn/kernels/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <limits>

namespace hspn::kernels {

// ---------------------------------------------------------------------------
// scalar reference kernels
// ---------------------------------------------------------------------------

namespace scalar {

void gemm_nn(const double* A, const double* B, double* C, int m, int k, int n,
             bool accumulate) {
  for (int i = 0; i < m; ++i) {
    double* ci = C + static_cast<size_t>(i) * n;
    if (!accumulate)
      for (int j = 0; j < n; ++j) ci[j] = 0.0;
    const double* ai = A + static_cast<size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double a = ai[p];
      const double* bp = B + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += a * bp[j];
    }
  }
}

void gemm_nt(const double* A, const double* B, double* C, int m, int k, int n,
             bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const double* ai = A + static_cast<size_t>(i) * k;
    double* ci = C + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = B + static_cast<size_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] = accumulate ? ci[j] + acc : acc;
    }
  }
}

void gemm_tn(const double* A, const double* B, double* C, int m, int k, int n,
             bool accumulate) {
  if (!accumulate) std::memset(C, 0, sizeof(double) * static_cast<size_t>(m) * n);
  for (int p = 0; p < k; ++p) {
    const double* ap = A + static_cast<size_t>(p) * m;
    const double* bp = B + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const double a = ap[i];
      double* ci = C + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) ci[j] += a * bp[j];
    }
  }
}

void nn_sqdist(const double* a, int na, const double* b, int nb, double* dist,
               int* idx) {
  for (int i = 0; i < na; ++i) {
    const double ax = a[3 * i], ay = a[3 * i + 1], az = a[3 * i + 2];
    double best = std::numeric_limits<double>::infinity();
    int bj = -1;
    for (int j = 0; j < nb; ++j) {
      const double dx = ax - b[3 * j];
      const double dy = ay - b[3 * j + 1];
      const double dz = az - b[3 * j + 2];
      const double d = dx * dx + dy * dy + dz * dz;
      if (d < best) {
        best = d;
        bj = j;
      }
    }
    dist[i] = best;
    idx[i] = bj;
  }
}

void point_sqdist(const double* pts, int n, const double* q, double* out) {
  const double qx = q[0], qy = q[1], qz = q[2];
  for (int i = 0; i < n; ++i) {
    const double dx = pts[3 * i] - qx;
    const double dy = pts[3 * i + 1] - qy;
    const double dz = pts[3 * i + 2] - qz;
    out[i] = dx * dx + dy * dy + dz * dz;
  }
}

void colmax(const double* in, int rows, int cols, double* out, int* argmax) {
  for (int j = 0; j < cols; ++j) {
    out[j] = in[j];
    argmax[j] = 0;
  }
  for (int r = 1; r < rows; ++r) {
    const double* row = in + static_cast<size_t>(r) * cols;
    for (int j = 0; j < cols; ++j) {
      if (row[j] > out[j]) {
        out[j] = row[j];
        argmax[j] = r;
      }
    }
  }
}

double dot(const double* a, const double* b, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void auction_scan(const double* benefit, const double* price, int n,
                  int* best_j, double* best_v, double* second_v) {
  double best = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
  int bj = -1;
  for (int j = 0; j < n; ++j) {
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

}  // namespace scalar

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

namespace {

struct KernelTable {
  void (*gemm_nn)(const double*, const double*, double*, int, int, int, bool);
  void (*gemm_nt)(const double*, const double*, double*, int, int, int, bool);
  void (*gemm_tn)(const double*, const double*, double*, int, int, int, bool);
  void (*nn_sqdist)(const double*, int, const double*, int, double*, int*);
  void (*point_sqdist)(const double*, int, const double*, double*);
  void (*colmax)(const double*, int, int, double*, int*);
  double (*dot)(const double*, const double*, int);
  void (*axpy)(double, const double*, double*, int);
  void (*auction_scan)(const double*, const double*, int, int*, double*, double*);
};

constexpr KernelTable kScalarTable = {
    scalar::gemm_nn, scalar::gemm_nt, scalar::gemm_tn, scalar::nn_sqdist,
    scalar::point_sqdist, scalar::colmax, scalar::dot, scalar::axpy,
    scalar::auction_scan};

#ifdef HSPN_HAVE_AVX2
constexpr KernelTable kAvx2Table = {
    avx2::gemm_nn, avx2::gemm_nt, avx2::gemm_tn, avx2::nn_sqdist,
    avx2::point_sqdist, avx2::colmax, avx2::dot, avx2::axpy,
    avx2::auction_scan};
#endif

bool avx2_supported() {
#ifdef HSPN_HAVE_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

struct Dispatch {
  Backend backend;
  const KernelTable* table;

  Dispatch() {
    backend = avx2_supported() ? Backend::avx2 : Backend::scalar;
    if (const char* env = std::getenv("HSPN_KERNELS")) {
      if (std::strcmp(env, "scalar") == 0) backend = Backend::scalar;
      if (std::strcmp(env, "avx2") == 0 && avx2_supported()) backend = Backend::avx2;
    }
    apply();
  }

  void apply() {
#ifdef HSPN_HAVE_AVX2
    table = backend == Backend::avx2 ? &kAvx2Table : &kScalarTable;
#else
    table = &kScalarTable;
#endif
  }
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

Backend active_backend() { return dispatch().backend; }

const char* backend_name() {
  return dispatch().backend == Backend::avx2 ? "avx2" : "scalar";
}

bool set_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_supported()) return false;
  dispatch().backend = b;
  dispatch().apply();
  return true;
}

void gemm_nn(const double* A, const double* B, double* C, int m, int k, int n,
             bool accumulate) {
  dispatch().table->gemm_nn(A, B, C, m, k, n, accumulate);
}
void gemm_nt(const double* A, const double* B, double* C, int m, int k, int n,
             bool accumulate) {
  dispatch().table->gemm_nt(A, B, C, m, k, n, accumulate);
}
void gemm_tn(const double* A, const double* B, double* C, int m, int k, int n,
             bool accumulate) {
  dispatch().table->gemm_tn(A, B, C, m, k, n, accumulate);
}
void nn_sqdist(const double* a, int na, const double* b, int nb, double* dist,
               int* idx) {
  dispatch().table->nn_sqdist(a, na, b, nb, dist, idx);
}
void point_sqdist(const double* pts, int n, const double* q, double* out) {
  dispatch().table->point_sqdist(pts, n, q, out);
}
void colmax(const double* in, int rows, int cols, double* out, int* argmax) {
  dispatch().table->colmax(in, rows, cols, out, argmax);
}
double dot(const double* a, const double* b, int n) {
  return dispatch().table->dot(a, b, n);
}
void axpy(double alpha, const double* x, double* y, int n) {
  dispatch().table->axpy(alpha, x, y, n);
}
void auction_scan(const double* benefit, const double* price, int n,
                  int* best_j, double* best_v, double* second_v) {
  dispatch().table->auction_scan(benefit, price, n, best_j, best_v, second_v);
}

}  // namespace hspn::kernels
