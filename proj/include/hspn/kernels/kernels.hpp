#pragma once

namespace hspn::kernels {

/// Compute backend for the arithmetic inner loops. Every kernel has a scalar
/// reference implementation and (on x86-64) an AVX2 variant; the active one
/// is chosen at runtime from CPU features, overridable via the HSPN_KERNELS
/// environment variable ("scalar" or "avx2") or set_backend().
enum class Backend { scalar, avx2 };

Backend active_backend();
const char* backend_name();

/// Force a backend. Returns false (and leaves the selection unchanged) if
/// the requested backend is not available on this machine.
bool set_backend(Backend b);

// ---- dense matrix products (row-major) ------------------------------------
// accumulate=false overwrites C, accumulate=true adds into it.

/// C[m x n] (+)= A[m x k] * B[k x n]
void gemm_nn(const double* A, const double* B, double* C, int m, int k, int n,
             bool accumulate);

/// C[m x n] (+)= A[m x k] * B[n x k]^T   (B stored row-major n x k)
void gemm_nt(const double* A, const double* B, double* C, int m, int k, int n,
             bool accumulate);

/// C[m x n] (+)= A[k x m]^T * B[k x n]   (A stored row-major k x m)
void gemm_tn(const double* A, const double* B, double* C, int m, int k, int n,
             bool accumulate);

// ---- point-set primitives --------------------------------------------------
// Point arrays are packed xyz triples. Ties always resolve to the lowest
// index; scalar and SIMD variants are bit-identical for these kernels.

/// For each of the na points in a: squared distance to the nearest of the
/// nb points in b, and that neighbour's index.
void nn_sqdist(const double* a, int na, const double* b, int nb, double* dist,
               int* idx);

/// Squared distance from every point of pts to the single point q.
void point_sqdist(const double* pts, int n, const double* q, double* out);

// ---- reductions ------------------------------------------------------------

/// Column-wise max over rows of in[rows x cols]; argmax keeps the first
/// maximizing row. Bit-identical across backends (comparisons only).
void colmax(const double* in, int rows, int cols, double* out, int* argmax);

double dot(const double* a, const double* b, int n);

/// y += alpha * x
void axpy(double alpha, const double* x, double* y, int n);

/// Auction bid scan: over j in [0, n), maximize v_j = benefit[j] - price[j].
/// Returns the best index (lowest on ties) plus the best and second-best
/// values; with n == 1 the second-best is -infinity.
void auction_scan(const double* benefit, const double* price, int n,
                  int* best_j, double* best_v, double* second_v);

// Scalar reference entry points, exposed for equivalence tests.
namespace scalar {
void gemm_nn(const double* A, const double* B, double* C, int m, int k, int n, bool accumulate);
void gemm_nt(const double* A, const double* B, double* C, int m, int k, int n, bool accumulate);
void gemm_tn(const double* A, const double* B, double* C, int m, int k, int n, bool accumulate);
void nn_sqdist(const double* a, int na, const double* b, int nb, double* dist, int* idx);
void point_sqdist(const double* pts, int n, const double* q, double* out);
void colmax(const double* in, int rows, int cols, double* out, int* argmax);
double dot(const double* a, const double* b, int n);
void axpy(double alpha, const double* x, double* y, int n);
void auction_scan(const double* benefit, const double* price, int n, int* best_j, double* best_v, double* second_v);
}  // namespace scalar

#ifdef HSPN_HAVE_AVX2
namespace avx2 {
void gemm_nn(const double* A, const double* B, double* C, int m, int k, int n, bool accumulate);
void gemm_nt(const double* A, const double* B, double* C, int m, int k, int n, bool accumulate);
void gemm_tn(const double* A, const double* B, double* C, int m, int k, int n, bool accumulate);
void nn_sqdist(const double* a, int na, const double* b, int nb, double* dist, int* idx);
void point_sqdist(const double* pts, int n, const double* q, double* out);
void colmax(const double* in, int rows, int cols, double* out, int* argmax);
double dot(const double* a, const double* b, int n);
void axpy(double alpha, const double* x, double* y, int n);
void auction_scan(const double* benefit, const double* price, int n, int* best_j, double* best_v, double* second_v);
}  // namespace avx2
#endif

}  // namespace hspn::kernels
