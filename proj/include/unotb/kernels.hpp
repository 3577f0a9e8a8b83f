#pragma once

#include <cstdint>

// Compute kernels behind everything numeric. Each hot kernel comes in three
// flavors:
//   foo        - blocked/vectorized, OpenMP over independent output rows
//   foo_serial - the same kernel pinned to one thread; bitwise identical to
//                foo at any thread count (threads never split a reduction)
//   foo_ref    - naive loops, kept as a readable correctness oracle
// Per output entry the reduction index always runs in ascending order, so
// results do not depend on the number of threads.
namespace unotb::kernels {

// Effective thread count: min(OMP max threads, UNOTB_THREADS if set).
int threads();

// C[M x N] = A[M x K] * B[K x N], row-major; accumulate adds into C instead.
void gemm_nn(const double* a, const double* b, double* c, int64_t m, int64_t k,
             int64_t n, bool accumulate = false);
void gemm_nn_serial(const double* a, const double* b, double* c, int64_t m,
                    int64_t k, int64_t n, bool accumulate = false);
void gemm_nn_ref(const double* a, const double* b, double* c, int64_t m,
                 int64_t k, int64_t n, bool accumulate = false);

// C[M x N] = A^T * B with A[K x M], B[K x N]; reduction over the K rows.
void gemm_tn(const double* a, const double* b, double* c, int64_t m, int64_t k,
             int64_t n, bool accumulate = false);
void gemm_tn_serial(const double* a, const double* b, double* c, int64_t m,
                    int64_t k, int64_t n, bool accumulate = false);
void gemm_tn_ref(const double* a, const double* b, double* c, int64_t m,
                 int64_t k, int64_t n, bool accumulate = false);

// C[M x N] = A * B^T with A[M x K], B[N x K].
void gemm_nt(const double* a, const double* b, double* c, int64_t m, int64_t k,
             int64_t n, bool accumulate = false);
void gemm_nt_serial(const double* a, const double* b, double* c, int64_t m,
                    int64_t k, int64_t n, bool accumulate = false);
void gemm_nt_ref(const double* a, const double* b, double* c, int64_t m,
                 int64_t k, int64_t n, bool accumulate = false);

// out[i] = log sum_j exp((shift[j] - c[i,j]) * inv_eps); shift may be null
// (treated as zero). Row-wise max subtraction keeps this overflow-safe.
void shifted_neg_lse_rows(const double* c, const double* shift, double inv_eps,
                          double* out, int64_t m, int64_t n);
void shifted_neg_lse_rows_serial(const double* c, const double* shift,
                                 double inv_eps, double* out, int64_t m,
                                 int64_t n);
void shifted_neg_lse_rows_ref(const double* c, const double* shift,
                              double inv_eps, double* out, int64_t m,
                              int64_t n);

// Elementwise / reduction helpers (single pass, deterministic order).
void relu_fwd(const double* x, double* y, int64_t n);
void relu_bwd(const double* x, const double* g, double* gx, int64_t n);
void add_bias(const double* x, const double* b, double* y, int64_t rows,
              int64_t cols);
void colsum_acc(const double* g, double* out, int64_t rows, int64_t cols);
void axpy(double alpha, const double* x, double* y, int64_t n);
double dot(const double* a, const double* b, int64_t n);
double sumsq(const double* a, int64_t n);

}  // namespace unotb::kernels
