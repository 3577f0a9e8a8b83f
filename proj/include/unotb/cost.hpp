#pragma once

#include <span>

#include "unotb/tensor.hpp"

namespace unotb {

// Ground cost between points, c(x, y) = alpha/2 * ||x - y||^2. Each marginal
// may use its own alpha; alpha must be positive.
struct CostFn {
  double alpha = 1.0;
};

CostFn make_cost(double alpha);

double cost_eval(const CostFn& c, std::span<const double> x,
                 std::span<const double> y);

// Row-wise batch forms: x and y are [B, D], out is [B, 1].
void cost_eval_rows(const CostFn& c, const Tensor& x, const Tensor& y,
                    Tensor& out);

// Accumulates d cost_i / d y into gy, scaled by gout[i] per row.
void cost_grad_y_rows_acc(const CostFn& c, const Tensor& x, const Tensor& y,
                          const Tensor& gout, Tensor& gy);

}  // namespace unotb
