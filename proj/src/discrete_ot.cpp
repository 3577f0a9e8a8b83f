#include "unotb/discrete_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "unotb/error.hpp"
#include "unotb/kernels.hpp"

namespace unotb {

namespace {

void check_weights(const std::vector<double>& w, int64_t expect,
                   const char* side) {
  if (static_cast<int64_t>(w.size()) != expect)
    throw ConfigError(std::string(side) + " weight count " +
                      std::to_string(w.size()) + " does not match cost");
  for (const double x : w)
    if (!(x > 0.0))
      throw ConfigError(std::string(side) +
                        " weights must be strictly positive");
}

double mean_of(const Tensor& t) {
  double s = 0.0;
  for (int64_t i = 0; i < t.size(); ++i) s += t[i];
  return s / static_cast<double>(t.size());
}

Tensor transposed(const Tensor& c) {
  Tensor t({c.cols(), c.rows()});
  for (int64_t i = 0; i < c.rows(); ++i)
    for (int64_t j = 0; j < c.cols(); ++j) t.at(j, i) = c.at(i, j);
  return t;
}

std::vector<double> anneal_schedule(double eps_final, double mean_cost,
                                    bool anneal) {
  std::vector<double> stages;
  if (anneal) {
    const double eps0 = 0.25 * mean_cost;
    for (double e = eps0; e > eps_final * 1.5; e /= 2.0) stages.push_back(e);
  }
  stages.push_back(eps_final);
  return stages;
}

int find_root(std::vector<int32_t>& parent, int32_t x) {
  while (parent[static_cast<size_t>(x)] != x) {
    parent[static_cast<size_t>(x)] =
        parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
    x = parent[static_cast<size_t>(x)];
  }
  return x;
}

// Per-cluster mass correction. Under plain alternation the mass carried by a
// quasi-disconnected cluster only contracts at rate tau/(tau+eps), which
// stalls when eps << tau. Shifting u by the closed-form constant that makes
// sum_{i in c} a_i exp(-u_i/tau) match the cluster's target mass removes
// those modes outright, and every shift vanishes at the optimum. Clusters
// are connected components of the bipartite graph keeping the edges that
// carry at least exp(-55) of their row's conditional plan mass.
void relaxed_cluster_shift(const Tensor& cost, const std::vector<double>& v,
                           const std::vector<double>& b,
                           const std::vector<double>& loga,
                           const std::vector<double>& logb, double eps,
                           double tau, std::vector<double>& u) {
  const int64_t n = cost.rows(), m = cost.cols();
  std::vector<int32_t> parent(static_cast<size_t>(n + m));
  for (size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int32_t>(i);
  for (int64_t i = 0; i < n; ++i) {
    const double* ci = cost.data() + i * m;
    double rowmax = -std::numeric_limits<double>::infinity();
    for (int64_t j = 0; j < m; ++j)
      rowmax = std::max(rowmax, v[static_cast<size_t>(j)] +
                                    eps * logb[static_cast<size_t>(j)] - ci[j]);
    const double cut = rowmax - 55.0 * eps;
    for (int64_t j = 0; j < m; ++j) {
      if (v[static_cast<size_t>(j)] + eps * logb[static_cast<size_t>(j)] -
              ci[j] <
          cut)
        continue;
      const int32_t ri = find_root(parent, static_cast<int32_t>(i));
      const int32_t rj = find_root(parent, static_cast<int32_t>(n + j));
      if (ri != rj) parent[static_cast<size_t>(rj)] = ri;
    }
  }
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> peak(static_cast<size_t>(n + m), neg_inf);
  std::vector<double> expsum(static_cast<size_t>(n + m), 0.0);
  std::vector<double> target(static_cast<size_t>(n + m), 0.0);
  double gpeak = neg_inf, gmass = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double t = loga[static_cast<size_t>(i)] -
                     u[static_cast<size_t>(i)] / tau;
    const auto r = static_cast<size_t>(find_root(parent, static_cast<int32_t>(i)));
    peak[r] = std::max(peak[r], t);
    gpeak = std::max(gpeak, t);
  }
  double gsum = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double t = loga[static_cast<size_t>(i)] -
                     u[static_cast<size_t>(i)] / tau;
    const auto r = static_cast<size_t>(find_root(parent, static_cast<int32_t>(i)));
    expsum[r] += std::exp(t - peak[r]);
    gsum += std::exp(t - gpeak);
  }
  for (int64_t j = 0; j < m; ++j) {
    target[static_cast<size_t>(
        find_root(parent, static_cast<int32_t>(n + j)))] +=
        b[static_cast<size_t>(j)];
    gmass += b[static_cast<size_t>(j)];
  }
  // A uniform shift is pure gauge (v absorbs it and the plan is untouched),
  // so the global Newton step can be taken at full length. Cluster-relative
  // corrections invalidate the cluster split itself when they grow past the
  // exp(-55) cut, and tau turns small mass errors into huge steps, so they
  // are trusted only up to a few eps per sweep.
  const double global_shift =
      tau * (std::log(gmass) - (gpeak + std::log(gsum)));
  const double trust = 10.0 * eps;
  for (int64_t i = 0; i < n; ++i) {
    const auto r = static_cast<size_t>(find_root(parent, static_cast<int32_t>(i)));
    double shift = global_shift;
    if (target[r] > 0.0 && expsum[r] > 0.0) {
      const double local =
          tau * (std::log(target[r]) - (peak[r] + std::log(expsum[r])));
      shift += std::clamp(local - global_shift, -trust, trust);
    }
    u[static_cast<size_t>(i)] -= shift;
  }
}

// One half sweep: out_i = -eps * lse_j((pot[j] + eps*log w[j] - C[i,j])/eps).
void half_sweep(const Tensor& cost, const std::vector<double>& pot,
                const std::vector<double>& logw, double eps,
                std::vector<double>& shift, std::vector<double>& out) {
  const int64_t rows = cost.rows(), cols = cost.cols();
  for (int64_t j = 0; j < cols; ++j) shift[j] = pot[j] + eps * logw[j];
  kernels::shifted_neg_lse_rows(cost.data(), shift.data(), 1.0 / eps,
                                out.data(), rows, cols);
  for (int64_t i = 0; i < rows; ++i) out[i] *= -eps;
}

DiscretePlan run_sinkhorn(const Tensor& cost, const std::vector<double>& a,
                          const std::vector<double>& b, double tau_or_zero,
                          const SinkhornOptions& opts) {
  const int64_t n = cost.rows(), m = cost.cols();
  check_weights(a, n, "source");
  check_weights(b, m, "target");
  if (!cost.all_finite()) throw NumericError("cost matrix has non-finite entries");

  const double mean_cost = std::max(mean_of(cost), 1e-300);
  const double eps_final =
      opts.eps > 0.0 ? opts.eps : opts.eps_scale * mean_cost;
  if (!(eps_final > 0.0)) throw ConfigError("sinkhorn eps must be positive");
  const bool relaxed = tau_or_zero > 0.0;

  const Tensor cost_t = transposed(cost);
  std::vector<double> loga(n), logb(m);
  for (int64_t i = 0; i < n; ++i) loga[i] = std::log(a[i]);
  for (int64_t j = 0; j < m; ++j) logb[j] = std::log(b[j]);

  DiscretePlan out;
  out.u.assign(n, 0.0);
  out.v.assign(m, 0.0);
  std::vector<double> shift(std::max(n, m)), unew(n);

  const auto stages = anneal_schedule(eps_final, mean_cost, opts.anneal);
  int64_t iters_left = opts.max_iter;
  double last_res = 0.0;
  bool converged = false;

  for (size_t stage = 0; stage < stages.size(); ++stage) {
    const double eps = stages[stage];
    const bool final_stage = stage + 1 == stages.size();
    const double scale = relaxed ? tau_or_zero / (tau_or_zero + eps) : 1.0;
    const double tol = final_stage ? opts.tol : 1e-3;
    const int64_t cap = final_stage ? iters_left
                                    : std::min<int64_t>(iters_left, 300);
    converged = false;
    // Over-relaxation cuts sweeps ~30%, but can ring on instances with many
    // exact ties; fall back to plain updates when the residual stops
    // improving.
    double omega = 1.5;
    double best_res = std::numeric_limits<double>::infinity();
    int since_best = 0;
    for (int64_t it = 0; it < cap; ++it) {
      // unew first holds the balanced-style response to the current v.
      half_sweep(cost, out.v, logb, eps, shift, unew);
      if (relaxed) {
        // Fixed-point test on the quantity the problem actually pins down:
        // each row's plan marginal a_i exp((u_i - unew_i)/eps) against its
        // relaxed target a_i exp(-u_i/tau), relative to a_i. A du-based
        // test would inherit a (tau+eps)/eps stiffness factor and stall.
        double res = 0.0;
        for (int64_t i = 0; i < n; ++i) {
          const double arg = (out.u[i] - unew[i]) / eps;
          const double rel =
              arg > 700.0
                  ? std::numeric_limits<double>::infinity()
                  : std::abs(std::exp(arg) -
                             std::exp(-out.u[i] / tau_or_zero));
          res = std::max(res, rel);
        }
        last_res = res;
        if (last_res <= tol) {
          converged = true;
          break;
        }
        for (int64_t i = 0; i < n; ++i)
          out.u[i] += omega * (scale * unew[i] - out.u[i]);
        relaxed_cluster_shift(cost, out.v, b, loga, logb, eps, tau_or_zero,
                              out.u);
      } else {
        double du = 0.0;
        for (int64_t i = 0; i < n; ++i) {
          du = std::max(du, std::abs(unew[i] - out.u[i]));
          unew[i] = out.u[i] + omega * (unew[i] - out.u[i]);
        }
        out.u.swap(unew);
        last_res = du / eps;
      }
      if (last_res < best_res) {
        best_res = last_res;
        since_best = 0;
      } else if (++since_best >= 20 && omega > 1.0) {
        omega = 1.0;
        since_best = 0;
      }
      half_sweep(cost_t, out.u, loga, eps, shift, out.v);
      ++out.iterations;
      --iters_left;
      if (!relaxed && last_res <= tol) {
        converged = true;
        break;
      }
      if (iters_left <= 0) break;
    }
    if (final_stage) break;
    if (iters_left <= 0) break;
  }
  if (!converged)
    throw NumericError("sinkhorn failed to converge: residual " +
                       std::to_string(last_res) + " > " +
                       std::to_string(opts.tol) + " after " +
                       std::to_string(out.iterations) + " sweeps (eps=" +
                       std::to_string(eps_final) + ")");

  out.eps = eps_final;
  out.plan = Tensor({n, m});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < m; ++j)
      out.plan.at(i, j) = std::exp((out.u[i] + out.v[j] - cost.at(i, j)) /
                                   eps_final + loga[i] + logb[j]);
  out.transport_cost =
      kernels::dot(out.plan.data(), cost.data(), out.plan.size());

  // Exact-side violation: columns always, rows only in the balanced case.
  double err = 0.0;
  for (int64_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += out.plan.at(i, j);
    err = std::max(err, std::abs(s - b[j]));
  }
  if (!relaxed) {
    for (int64_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (int64_t j = 0; j < m; ++j) s += out.plan.at(i, j);
      err = std::max(err, std::abs(s - a[i]));
    }
    out.marginal_err = err;
    out.objective = out.transport_cost;
  } else {
    out.marginal_err = err;
    double kl = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      double r = 0.0;
      for (int64_t j = 0; j < m; ++j) r += out.plan.at(i, j);
      if (r > 0.0) kl += r * std::log(r / a[i]) - r + a[i];
      else kl += a[i];
    }
    out.objective = out.transport_cost + tau_or_zero * kl;
  }
  return out;
}

}  // namespace

DiscretePlan sinkhorn_balanced(const Tensor& cost, const std::vector<double>& a,
                               const std::vector<double>& b,
                               const SinkhornOptions& opts) {
  return run_sinkhorn(cost, a, b, 0.0, opts);
}

DiscretePlan sinkhorn_semi_relaxed(const Tensor& cost,
                                   const std::vector<double>& a,
                                   const std::vector<double>& b, double tau,
                                   const SinkhornOptions& opts) {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  return run_sinkhorn(cost, a, b, tau, opts);
}

double brute_force_uniform_ot(const Tensor& cost) {
  const int64_t n = cost.rows();
  if (cost.cols() != n || n > 8)
    throw ConfigError("brute force solver handles square costs with n <= 8");
  std::vector<int64_t> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += cost.at(i, perm[static_cast<size_t>(i)]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

namespace {
Tensor pairwise_sq_dist(const Tensor& x, const Tensor& y, double scale) {
  const int64_t n = x.rows(), m = y.rows(), d = x.cols();
  if (y.cols() != d) throw ConfigError("point clouds have mismatched dims");
  Tensor c({n, m});
  for (int64_t i = 0; i < n; ++i) {
    const double* xi = x.data() + i * d;
    for (int64_t j = 0; j < m; ++j) {
      const double* yj = y.data() + j * d;
      double s = 0.0;
      for (int64_t k = 0; k < d; ++k) {
        const double diff = xi[k] - yj[k];
        s += diff * diff;
      }
      c.at(i, j) = scale * s;
    }
  }
  return c;
}
}  // namespace

double w2_squared(const Tensor& x, const Tensor& y,
                  const SinkhornOptions& opts) {
  const Tensor c = pairwise_sq_dist(x, y, 1.0);
  const std::vector<double> a(static_cast<size_t>(x.rows()),
                              1.0 / static_cast<double>(x.rows()));
  const std::vector<double> b(static_cast<size_t>(y.rows()),
                              1.0 / static_cast<double>(y.rows()));
  return sinkhorn_balanced(c, a, b, opts).transport_cost;
}

BarycenterOracle interpolated_barycenter_oracle(const Tensor& x1,
                                                const Tensor& x2,
                                                double lambda1, double lambda2,
                                                double tau,
                                                const SinkhornOptions& opts) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0) ||
      std::abs(lambda1 + lambda2 - 1.0) > 1e-9)
    throw ConfigError("barycenter weights must be positive and sum to 1");
  const int64_t n1 = x1.rows(), n2 = x2.rows(), d = x1.cols();

  // The solver relaxes its source side, so solve with x2 as the source and
  // transpose the plan to get exact rows on the x1 side.
  const Tensor c21 = pairwise_sq_dist(x2, x1, 0.5 * lambda1);
  const std::vector<double> a2(static_cast<size_t>(n2),
                               1.0 / static_cast<double>(n2));
  const std::vector<double> a1(static_cast<size_t>(n1),
                               1.0 / static_cast<double>(n1));
  DiscretePlan rel = sinkhorn_semi_relaxed(c21, a2, a1, tau, opts);

  BarycenterOracle out;
  out.plan = rel;
  out.plan.plan = transposed(rel.plan);
  std::swap(out.plan.u, out.plan.v);

  out.t_uot = Tensor({n1, d});
  for (int64_t i = 0; i < n1; ++i) {
    double mass = 0.0;
    for (int64_t j = 0; j < n2; ++j) mass += out.plan.plan.at(i, j);
    if (!(mass > 0.0))
      throw NumericError("barycentric projection hit an empty plan row");
    for (int64_t k = 0; k < d; ++k) {
      double s = 0.0;
      for (int64_t j = 0; j < n2; ++j)
        s += out.plan.plan.at(i, j) * x2.at(j, k);
      out.t_uot.at(i, k) = s / mass;
    }
  }
  out.t_star = Tensor({n1, d});
  for (int64_t i = 0; i < n1; ++i)
    for (int64_t k = 0; k < d; ++k)
      out.t_star.at(i, k) = lambda1 * x1.at(i, k) + lambda2 * out.t_uot.at(i, k);
  return out;
}

}  // namespace unotb
