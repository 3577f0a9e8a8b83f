// Microbenchmark for the compute kernels: naive reference vs blocked serial
// vs blocked OpenMP, on the matrix shapes the trainer actually hits.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "unotb/kernels.hpp"
#include "unotb/rng.hpp"
#include "unotb/tensor.hpp"

namespace {

using unotb::Rng;
using unotb::Tensor;
using Clock = std::chrono::steady_clock;

double time_of(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

Tensor random_matrix(int64_t r, int64_t c, Rng& rng) {
  Tensor t({r, c});
  for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

void bench_gemm(const char* name, int64_t m, int64_t k, int64_t n, int reps) {
  Rng rng(1234);
  Tensor a = random_matrix(m, k, rng);
  Tensor at = random_matrix(k, m, rng);
  Tensor bt = random_matrix(n, k, rng);
  Tensor b = random_matrix(k, n, rng);
  Tensor c({m, n});
  const double flops = 2.0 * static_cast<double>(m) * k * n;

  struct Entry {
    const char* label;
    std::function<void()> fn;
  };
  const std::vector<Entry> entries = {
      {"ref", [&] { unotb::kernels::gemm_nn_ref(a.data(), b.data(), c.data(), m, k, n); }},
      {"nn serial", [&] { unotb::kernels::gemm_nn_serial(a.data(), b.data(), c.data(), m, k, n); }},
      {"nn omp", [&] { unotb::kernels::gemm_nn(a.data(), b.data(), c.data(), m, k, n); }},
      {"tn serial", [&] { unotb::kernels::gemm_tn_serial(at.data(), b.data(), c.data(), m, k, n); }},
      {"tn omp", [&] { unotb::kernels::gemm_tn(at.data(), b.data(), c.data(), m, k, n); }},
      {"nt serial", [&] { unotb::kernels::gemm_nt_serial(a.data(), bt.data(), c.data(), m, k, n); }},
      {"nt omp", [&] { unotb::kernels::gemm_nt(a.data(), bt.data(), c.data(), m, k, n); }},
  };
  std::printf("gemm %-18s M=%-5lld K=%-4lld N=%-4lld\n", name,
              static_cast<long long>(m), static_cast<long long>(k),
              static_cast<long long>(n));
  for (const auto& e : entries) {
    const double sec = time_of(e.fn, reps);
    std::printf("  %-10s %8.3f ms   %7.2f GFLOP/s\n", e.label, sec * 1e3,
                flops / sec * 1e-9);
  }
}

void bench_lse(int64_t m, int64_t n, int reps) {
  Rng rng(99);
  Tensor c = random_matrix(m, n, rng);
  Tensor shift = random_matrix(1, n, rng);
  Tensor out({m, 1});
  const auto serial = [&] {
    unotb::kernels::shifted_neg_lse_rows_serial(c.data(), shift.data(), 10.0,
                                                out.data(), m, n);
  };
  const auto omp = [&] {
    unotb::kernels::shifted_neg_lse_rows(c.data(), shift.data(), 10.0,
                                         out.data(), m, n);
  };
  const double s1 = time_of(serial, reps);
  const double s2 = time_of(omp, reps);
  std::printf("lse rows M=%lld N=%lld: serial %.3f ms, omp %.3f ms (%.1f Melem/s)\n",
              static_cast<long long>(m), static_cast<long long>(n), s1 * 1e3,
              s2 * 1e3, static_cast<double>(m) * n / s2 * 1e-6);
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", unotb::kernels::threads());
  bench_gemm("fwd hidden", 1024, 128, 128, 50);
  bench_gemm("fwd input", 1024, 2, 128, 50);
  bench_gemm("fwd out", 1024, 128, 2, 50);
  bench_gemm("gradW", 128, 1024, 128, 50);
  bench_gemm("wide hidden", 1024, 256, 256, 20);
  bench_gemm("small", 64, 64, 64, 200);
  std::printf("\n");
  bench_lse(2000, 2000, 10);
  return 0;
}
