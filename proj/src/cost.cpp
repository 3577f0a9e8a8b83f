#include "unotb/cost.hpp"

#include <cassert>

#include "unotb/error.hpp"

namespace unotb {

CostFn make_cost(double alpha) {
  if (!(alpha > 0.0))
    throw ConfigError("cost alpha must be positive, got " +
                      std::to_string(alpha));
  return CostFn{alpha};
}

double cost_eval(const CostFn& c, std::span<const double> x,
                 std::span<const double> y) {
  assert(x.size() == y.size());
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return 0.5 * c.alpha * s;
}

void cost_eval_rows(const CostFn& c, const Tensor& x, const Tensor& y,
                    Tensor& out) {
  assert(x.same_shape(y) && out.size() == x.rows());
  const int64_t rows = x.rows(), cols = x.cols();
  for (int64_t i = 0; i < rows; ++i) {
    const double* xr = x.data() + i * cols;
    const double* yr = y.data() + i * cols;
    double s = 0.0;
    for (int64_t j = 0; j < cols; ++j) {
      const double d = xr[j] - yr[j];
      s += d * d;
    }
    out[i] = 0.5 * c.alpha * s;
  }
}

void cost_grad_y_rows_acc(const CostFn& c, const Tensor& x, const Tensor& y,
                          const Tensor& gout, Tensor& gy) {
  assert(x.same_shape(y) && gy.same_shape(y) && gout.size() == x.rows());
  const int64_t rows = x.rows(), cols = x.cols();
  for (int64_t i = 0; i < rows; ++i) {
    const double* xr = x.data() + i * cols;
    const double* yr = y.data() + i * cols;
    double* gr = gy.data() + i * cols;
    const double scale = c.alpha * gout[i];
    for (int64_t j = 0; j < cols; ++j) gr[j] += scale * (yr[j] - xr[j]);
  }
}

}  // namespace unotb
