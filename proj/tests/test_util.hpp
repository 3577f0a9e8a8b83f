#pragma once

#include <cmath>
#include <functional>

#include "unotb/rng.hpp"
#include "unotb/tensor.hpp"

namespace unotb::testutil {

inline Tensor random_matrix(int64_t rows, int64_t cols, Rng& rng,
                            double scale = 1.0) {
  Tensor t({rows, cols});
  for (int64_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
  return t;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max({1.0, std::abs(got), std::abs(want)});
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (int64_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (int64_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

// Central finite difference of a scalar function at one coordinate of the
// given tensor.
inline double fd_grad(Tensor& param, int64_t idx,
                      const std::function<double()>& loss, double step = 1e-6) {
  const double saved = param[idx];
  param[idx] = saved + step;
  const double up = loss();
  param[idx] = saved - step;
  const double down = loss();
  param[idx] = saved;
  return (up - down) / (2.0 * step);
}

}  // namespace unotb::testutil
