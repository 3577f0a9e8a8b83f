#pragma once

#include <cstdint>
#include <vector>

#include "unotb/tensor.hpp"

namespace unotb {

// Discrete OT solvers used as ground-truth oracles and for evaluation
// metrics. Everything runs in the log domain; epsilon annealing with warm
// starts keeps small regularization stable.
struct SinkhornOptions {
  double eps = 0.0;         // absolute regularization; 0 selects eps_scale
  double eps_scale = 2e-3;  // eps = eps_scale * mean(cost) when eps == 0
  double tol = 1e-5;  // balanced: max |du|/eps; relaxed: worst row-marginal
                      // gap against a_i exp(-u_i/tau), relative to a_i
  int64_t max_iter = 40000;  // total update sweeps across all stages
  bool anneal = true;
};

struct DiscretePlan {
  Tensor plan;             // [n, m], couples source rows to target columns
  std::vector<double> u, v;  // scaled potentials (log domain)
  double eps = 0.0;
  double transport_cost = 0.0;  // <plan, cost>
  double objective = 0.0;  // + tau * KL(row marginal | a) when relaxed
  double marginal_err = 0.0;  // L-inf violation on the exactly-held side(s)
  int64_t iterations = 0;
};

// Both marginals held exactly. Throws NumericError if the marginal violation
// still exceeds tol * mass after max_iter sweeps.
DiscretePlan sinkhorn_balanced(const Tensor& cost,
                               const std::vector<double>& a,
                               const std::vector<double>& b,
                               const SinkhornOptions& opts = {});

// Source (row) marginal relaxed by KL with strength tau; target held
// exactly. The converged row marginal is a_i * exp(-u_i / tau).
DiscretePlan sinkhorn_semi_relaxed(const Tensor& cost,
                                   const std::vector<double>& a,
                                   const std::vector<double>& b, double tau,
                                   const SinkhornOptions& opts = {});

// Exact optimum for uniform weights on an n x n cost (n <= 8), by
// permutation enumeration.
double brute_force_uniform_ot(const Tensor& cost);

// Squared 2-Wasserstein distance between empirical clouds under the
// convention c(x, y) = ||x - y||^2 (no 1/2), uniform weights.
double w2_squared(const Tensor& x, const Tensor& y,
                  const SinkhornOptions& opts = {});

// Two-marginal barycenter ground truth on point clouds. Marginal 1 is held
// exactly, marginal 2 is KL-relaxed with strength tau. Pairing x1 with x2
// and placing barycenter mass at lambda1 x1 + lambda2 x2 reduces the
// problem to a pairwise plan for cost lambda1 * (1/2)||x1 - x2||^2 with the
// same tau; t_star rows are the barycenter images of the x1 points.
struct BarycenterOracle {
  Tensor t_uot;   // [n1, D] barycentric projection of the pairwise plan
  Tensor t_star;  // [n1, D] lambda1 x + lambda2 t_uot(x)
  DiscretePlan plan;  // rows follow x1 (exact side), cols follow x2
};

BarycenterOracle interpolated_barycenter_oracle(
    const Tensor& x1, const Tensor& x2, double lambda1, double lambda2,
    double tau, const SinkhornOptions& opts = {});

}  // namespace unotb
