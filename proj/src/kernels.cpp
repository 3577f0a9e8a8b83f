#include "unotb/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

namespace unotb::kernels {

int threads() {
  static const int cached = [] {
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("UNOTB_THREADS")) {
      const int cap = std::atoi(env);
      if (cap >= 1) n = std::min(n, cap);
    }
    return std::max(1, n);
  }();
  return cached;
}

namespace {

constexpr int64_t kMr = 4;   // output rows per tile
constexpr int64_t kNr = 32;  // output cols per tile

// Full-size NN tile: registers accumulate over the whole K range in ascending
// order, one store at the end.
inline void tile_nn_full(const double* a, int64_t lda, const double* b,
                         int64_t ldb, double* c, int64_t ldc, int64_t k,
                         bool accumulate) {
  double t[kMr][kNr] = {};
  for (int64_t p = 0; p < k; ++p) {
    const double* brow = b + p * ldb;
    for (int64_t r = 0; r < kMr; ++r) {
      const double av = a[r * lda + p];
#pragma omp simd
      for (int64_t j = 0; j < kNr; ++j) t[r][j] += av * brow[j];
    }
  }
  for (int64_t r = 0; r < kMr; ++r) {
    double* crow = c + r * ldc;
    if (accumulate) {
#pragma omp simd
      for (int64_t j = 0; j < kNr; ++j) crow[j] += t[r][j];
    } else {
#pragma omp simd
      for (int64_t j = 0; j < kNr; ++j) crow[j] = t[r][j];
    }
  }
}

// Edge tile with runtime bounds; same ascending-K accumulation.
inline void tile_nn_edge(const double* a, int64_t lda, const double* b,
                         int64_t ldb, double* c, int64_t ldc, int64_t k,
                         int64_t mr, int64_t nr, bool accumulate) {
  double t[kMr][kNr] = {};
  for (int64_t p = 0; p < k; ++p) {
    const double* brow = b + p * ldb;
    for (int64_t r = 0; r < mr; ++r) {
      const double av = a[r * lda + p];
      for (int64_t j = 0; j < nr; ++j) t[r][j] += av * brow[j];
    }
  }
  for (int64_t r = 0; r < mr; ++r) {
    double* crow = c + r * ldc;
    for (int64_t j = 0; j < nr; ++j)
      crow[j] = accumulate ? crow[j] + t[r][j] : t[r][j];
  }
}

void gemm_nn_impl(const double* a, const double* b, double* c, int64_t m,
                  int64_t k, int64_t n, bool accumulate, int nthreads) {
  const int64_t row_tiles = (m + kMr - 1) / kMr;
#pragma omp parallel for schedule(static) num_threads(nthreads) \
    if (nthreads > 1)
  for (int64_t rt = 0; rt < row_tiles; ++rt) {
    const int64_t i0 = rt * kMr;
    const int64_t mr = std::min(kMr, m - i0);
    for (int64_t j0 = 0; j0 < n; j0 += kNr) {
      const int64_t nr = std::min(kNr, n - j0);
      if (mr == kMr && nr == kNr)
        tile_nn_full(a + i0 * k, k, b + j0, n, c + i0 * n + j0, n, k,
                     accumulate);
      else
        tile_nn_edge(a + i0 * k, k, b + j0, n, c + i0 * n + j0, n, k, mr, nr,
                     accumulate);
    }
  }
}

// TN tile: walks the K rows of both operands once, broadcasting from columns
// of A. Same accumulation order story as the NN tile.
inline void tile_tn_full(const double* a, int64_t lda, const double* b,
                         int64_t ldb, double* c, int64_t ldc, int64_t k,
                         bool accumulate) {
  double t[kMr][kNr] = {};
  for (int64_t p = 0; p < k; ++p) {
    const double* arow = a + p * lda;
    const double* brow = b + p * ldb;
    for (int64_t r = 0; r < kMr; ++r) {
      const double av = arow[r];
#pragma omp simd
      for (int64_t j = 0; j < kNr; ++j) t[r][j] += av * brow[j];
    }
  }
  for (int64_t r = 0; r < kMr; ++r) {
    double* crow = c + r * ldc;
    if (accumulate) {
#pragma omp simd
      for (int64_t j = 0; j < kNr; ++j) crow[j] += t[r][j];
    } else {
#pragma omp simd
      for (int64_t j = 0; j < kNr; ++j) crow[j] = t[r][j];
    }
  }
}

inline void tile_tn_edge(const double* a, int64_t lda, const double* b,
                         int64_t ldb, double* c, int64_t ldc, int64_t k,
                         int64_t mr, int64_t nr, bool accumulate) {
  double t[kMr][kNr] = {};
  for (int64_t p = 0; p < k; ++p) {
    const double* arow = a + p * lda;
    const double* brow = b + p * ldb;
    for (int64_t r = 0; r < mr; ++r) {
      const double av = arow[r];
      for (int64_t j = 0; j < nr; ++j) t[r][j] += av * brow[j];
    }
  }
  for (int64_t r = 0; r < mr; ++r) {
    double* crow = c + r * ldc;
    for (int64_t j = 0; j < nr; ++j)
      crow[j] = accumulate ? crow[j] + t[r][j] : t[r][j];
  }
}

void gemm_tn_impl(const double* a, const double* b, double* c, int64_t m,
                  int64_t k, int64_t n, bool accumulate, int nthreads) {
  const int64_t row_tiles = (m + kMr - 1) / kMr;
#pragma omp parallel for schedule(static) num_threads(nthreads) \
    if (nthreads > 1)
  for (int64_t rt = 0; rt < row_tiles; ++rt) {
    const int64_t i0 = rt * kMr;
    const int64_t mr = std::min(kMr, m - i0);
    for (int64_t j0 = 0; j0 < n; j0 += kNr) {
      const int64_t nr = std::min(kNr, n - j0);
      if (mr == kMr && nr == kNr)
        tile_tn_full(a + i0, m, b + j0, n, c + i0 * n + j0, n, k, accumulate);
      else
        tile_tn_edge(a + i0, m, b + j0, n, c + i0 * n + j0, n, k, mr, nr,
                     accumulate);
    }
  }
}

// NT: pack a transposed panel of B so the inner loop can reuse the NN tile
// with contiguous rows. Packing preserves ascending K order per entry.
void gemm_nt_impl(const double* a, const double* b, double* c, int64_t m,
                  int64_t k, int64_t n, bool accumulate, int nthreads) {
  std::vector<double> packed(static_cast<size_t>(k) * kNr);
  const int64_t row_tiles = (m + kMr - 1) / kMr;
  for (int64_t j0 = 0; j0 < n; j0 += kNr) {
    const int64_t nr = std::min(kNr, n - j0);
    for (int64_t p = 0; p < k; ++p)
      for (int64_t j = 0; j < nr; ++j)
        packed[static_cast<size_t>(p * nr + j)] = b[(j0 + j) * k + p];
#pragma omp parallel for schedule(static) num_threads(nthreads) \
    if (nthreads > 1)
    for (int64_t rt = 0; rt < row_tiles; ++rt) {
      const int64_t i0 = rt * kMr;
      const int64_t mr = std::min(kMr, m - i0);
      if (mr == kMr && nr == kNr)
        tile_nn_full(a + i0 * k, k, packed.data(), nr, c + i0 * n + j0, n, k,
                     accumulate);
      else
        tile_nn_edge(a + i0 * k, k, packed.data(), nr, c + i0 * n + j0, n, k,
                     mr, nr, accumulate);
    }
  }
}

void lse_impl(const double* c, const double* shift, double inv_eps, double* out,
              int64_t m, int64_t n, int nthreads) {
#pragma omp parallel for schedule(static) num_threads(nthreads) \
    if (nthreads > 1)
  for (int64_t i = 0; i < m; ++i) {
    const double* row = c + i * n;
    double hi = -std::numeric_limits<double>::infinity();
    for (int64_t j = 0; j < n; ++j) {
      const double v = ((shift ? shift[j] : 0.0) - row[j]) * inv_eps;
      hi = std::max(hi, v);
    }
    if (!std::isfinite(hi)) {
      out[i] = hi;  // all -inf (empty support) stays -inf
      continue;
    }
    double s = 0.0;
    for (int64_t j = 0; j < n; ++j) {
      const double v = ((shift ? shift[j] : 0.0) - row[j]) * inv_eps;
      s += std::exp(v - hi);
    }
    out[i] = hi + std::log(s);
  }
}

}  // namespace

void gemm_nn(const double* a, const double* b, double* c, int64_t m, int64_t k,
             int64_t n, bool accumulate) {
  gemm_nn_impl(a, b, c, m, k, n, accumulate, threads());
}

void gemm_nn_serial(const double* a, const double* b, double* c, int64_t m,
                    int64_t k, int64_t n, bool accumulate) {
  gemm_nn_impl(a, b, c, m, k, n, accumulate, 1);
}

void gemm_nn_ref(const double* a, const double* b, double* c, int64_t m,
                 int64_t k, int64_t n, bool accumulate) {
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) {
      double s = accumulate ? c[i * n + j] : 0.0;
      for (int64_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
}

void gemm_tn(const double* a, const double* b, double* c, int64_t m, int64_t k,
             int64_t n, bool accumulate) {
  gemm_tn_impl(a, b, c, m, k, n, accumulate, threads());
}

void gemm_tn_serial(const double* a, const double* b, double* c, int64_t m,
                    int64_t k, int64_t n, bool accumulate) {
  gemm_tn_impl(a, b, c, m, k, n, accumulate, 1);
}

void gemm_tn_ref(const double* a, const double* b, double* c, int64_t m,
                 int64_t k, int64_t n, bool accumulate) {
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) {
      double s = accumulate ? c[i * n + j] : 0.0;
      for (int64_t p = 0; p < k; ++p) s += a[p * m + i] * b[p * n + j];
      c[i * n + j] = s;
    }
}

void gemm_nt(const double* a, const double* b, double* c, int64_t m, int64_t k,
             int64_t n, bool accumulate) {
  gemm_nt_impl(a, b, c, m, k, n, accumulate, threads());
}

void gemm_nt_serial(const double* a, const double* b, double* c, int64_t m,
                    int64_t k, int64_t n, bool accumulate) {
  gemm_nt_impl(a, b, c, m, k, n, accumulate, 1);
}

void gemm_nt_ref(const double* a, const double* b, double* c, int64_t m,
                 int64_t k, int64_t n, bool accumulate) {
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) {
      double s = accumulate ? c[i * n + j] : 0.0;
      for (int64_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
      c[i * n + j] = s;
    }
}

void shifted_neg_lse_rows(const double* c, const double* shift, double inv_eps,
                          double* out, int64_t m, int64_t n) {
  lse_impl(c, shift, inv_eps, out, m, n, threads());
}

void shifted_neg_lse_rows_serial(const double* c, const double* shift,
                                 double inv_eps, double* out, int64_t m,
                                 int64_t n) {
  lse_impl(c, shift, inv_eps, out, m, n, 1);
}

void shifted_neg_lse_rows_ref(const double* c, const double* shift,
                              double inv_eps, double* out, int64_t m,
                              int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    double hi = -std::numeric_limits<double>::infinity();
    for (int64_t j = 0; j < n; ++j)
      hi = std::max(hi, ((shift ? shift[j] : 0.0) - c[i * n + j]) * inv_eps);
    if (!std::isfinite(hi)) {
      out[i] = hi;
      continue;
    }
    double s = 0.0;
    for (int64_t j = 0; j < n; ++j)
      s += std::exp(((shift ? shift[j] : 0.0) - c[i * n + j]) * inv_eps - hi);
    out[i] = hi + std::log(s);
  }
}

void relu_fwd(const double* x, double* y, int64_t n) {
#pragma omp simd
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd(const double* x, const double* g, double* gx, int64_t n) {
#pragma omp simd
  for (int64_t i = 0; i < n; ++i) gx[i] += x[i] > 0.0 ? g[i] : 0.0;
}

void add_bias(const double* x, const double* b, double* y, int64_t rows,
              int64_t cols) {
  for (int64_t i = 0; i < rows; ++i) {
    const double* xr = x + i * cols;
    double* yr = y + i * cols;
#pragma omp simd
    for (int64_t j = 0; j < cols; ++j) yr[j] = xr[j] + b[j];
  }
}

void colsum_acc(const double* g, double* out, int64_t rows, int64_t cols) {
  for (int64_t i = 0; i < rows; ++i) {
    const double* gr = g + i * cols;
#pragma omp simd
    for (int64_t j = 0; j < cols; ++j) out[j] += gr[j];
  }
}

void axpy(double alpha, const double* x, double* y, int64_t n) {
#pragma omp simd
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double dot(const double* a, const double* b, int64_t n) {
  double s = 0.0;
  for (int64_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sumsq(const double* a, int64_t n) {
  double s = 0.0;
  for (int64_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

}  // namespace unotb::kernels
