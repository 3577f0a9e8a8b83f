#include "unotb/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "unotb/error.hpp"
#include "unotb/kernels.hpp"

namespace unotb {
namespace {

int64_t dim_of(const Tensor& cov) { return cov.rows(); }

Tensor identity(int64_t n) {
  Tensor v({n, n});
  for (int64_t i = 0; i < n; ++i) v.at(i, i) = 1.0;
  return v;
}

// C = A * B for square matrices; serial gemm, these are at most 64x64.
Tensor matmul(const Tensor& a, const Tensor& b) {
  const int64_t n = a.rows();
  Tensor c({n, n});
  kernels::gemm_nn_serial(a.data(), b.data(), c.data(), n, n, n);
  return c;
}

void symmetrize(Tensor& a) {
  const int64_t n = a.rows();
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (a.at(i, j) + a.at(j, i));
      a.at(i, j) = v;
      a.at(j, i) = v;
    }
}

double max_asymmetry(const Tensor& a) {
  const int64_t n = a.rows();
  double worst = 0.0;
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = i + 1; j < n; ++j)
      worst = std::max(worst, std::abs(a.at(i, j) - a.at(j, i)));
  return worst;
}

// V diag(f(w)) V^T, re-symmetrized to kill rounding skew.
Tensor eig_reconstruct(const Tensor& vectors, const std::vector<double>& fw) {
  const int64_t n = vectors.rows();
  Tensor scaled({n, n});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < n; ++j) scaled.at(i, j) = vectors.at(i, j) * fw[j];
  Tensor out({n, n});
  kernels::gemm_nt_serial(scaled.data(), vectors.data(), out.data(), n, n, n);
  symmetrize(out);
  return out;
}

enum class SqrtMode { kForward, kInverse };

Tensor sqrtm_impl(const Tensor& a, SqrtMode mode) {
  Tensor vectors;
  std::vector<double> values;
  sym_eig(a, vectors, values);
  const double top = values.empty() ? 0.0 : values.back();
  const double floor = 1e-12 * std::max(1.0, top);
  std::vector<double> fw(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] < -floor)
      throw NumericError("matrix square root of an indefinite matrix (min "
                         "eigenvalue " +
                         std::to_string(values[i]) + ")");
    const double w = std::max(values[i], 0.0);
    if (mode == SqrtMode::kInverse) {
      if (w <= floor)
        throw NumericError("inverse square root of a singular matrix (min "
                           "eigenvalue " +
                           std::to_string(values[i]) + ")");
      fw[i] = 1.0 / std::sqrt(w);
    } else {
      fw[i] = std::sqrt(w);
    }
  }
  return eig_reconstruct(vectors, fw);
}

double trace(const Tensor& a) {
  double t = 0.0;
  for (int64_t i = 0; i < a.rows(); ++i) t += a.at(i, i);
  return t;
}

// Squared Bures distance between covariances (zero-mean part of bw2).
double cov_bw2(const Tensor& s1, const Tensor& s2) {
  const Tensor root = sqrtm_spd(s1);
  const Tensor cross = sqrtm_spd(matmul(matmul(root, s2), root));
  const double d2 = trace(s1) + trace(s2) - 2.0 * trace(cross);
  return std::max(d2, 0.0);
}

void check_spd(const Tensor& cov, const char* what) {
  Tensor vectors;
  std::vector<double> values;
  sym_eig(cov, vectors, values);
  const double top = values.empty() ? 0.0 : values.back();
  if (values.empty() || values.front() <= 1e-12 * std::max(1.0, top))
    throw NumericError(std::string(what) +
                       " is not positive definite (min eigenvalue " +
                       std::to_string(values.empty() ? 0.0 : values.front()) +
                       ")");
}

}  // namespace

Gaussian make_gaussian(Tensor mean, Tensor cov) {
  if (mean.rank() != 1 || cov.rank() != 2 || cov.rows() != cov.cols() ||
      cov.rows() != mean.size())
    throw NumericError("gaussian shape mismatch: mean " + mean.shape_str() +
                       ", cov " + cov.shape_str());
  if (max_asymmetry(cov) > 1e-10)
    throw NumericError("covariance is not symmetric (skew " +
                       std::to_string(max_asymmetry(cov)) + ")");
  symmetrize(cov);
  check_spd(cov, "covariance");
  return Gaussian{std::move(mean), std::move(cov)};
}

void sym_eig(const Tensor& a, Tensor& vectors, std::vector<double>& values) {
  if (a.rank() != 2 || a.rows() != a.cols())
    throw NumericError("sym_eig needs a square matrix, got " + a.shape_str());
  const int64_t n = a.rows();
  Tensor w = a;
  symmetrize(w);  // tolerate rounding-level skew from matrix products
  vectors = identity(n);

  // Cyclic Jacobi: sweep all (p, q) pairs until the off-diagonal mass is
  // negligible against the Frobenius norm. Quadratic convergence makes the
  // sweep cap generous.
  const double frob = std::sqrt(kernels::sumsq(w.data(), w.size()));
  const double stop = 1e-15 * std::max(1.0, frob);
  constexpr int kMaxSweeps = 64;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (int64_t p = 0; p < n; ++p)
      for (int64_t q = p + 1; q < n; ++q) off += w.at(p, q) * w.at(p, q);
    if (std::sqrt(2.0 * off) <= stop) break;
    for (int64_t p = 0; p < n; ++p) {
      for (int64_t q = p + 1; q < n; ++q) {
        const double apq = w.at(p, q);
        if (apq == 0.0) continue;
        const double theta = (w.at(q, q) - w.at(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e10) {
          t = 0.5 / theta;
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        for (int64_t i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double wip = w.at(i, p), wiq = w.at(i, q);
          w.at(i, p) = wip - s * (wiq + tau * wip);
          w.at(i, q) = wiq + s * (wip - tau * wiq);
          w.at(p, i) = w.at(i, p);
          w.at(q, i) = w.at(i, q);
        }
        w.at(p, p) -= t * apq;
        w.at(q, q) += t * apq;
        w.at(p, q) = 0.0;
        w.at(q, p) = 0.0;
        for (int64_t i = 0; i < n; ++i) {
          const double vip = vectors.at(i, p), viq = vectors.at(i, q);
          vectors.at(i, p) = vip - s * (viq + tau * vip);
          vectors.at(i, q) = viq + s * (vip - tau * viq);
        }
      }
    }
  }

  values.resize(static_cast<size_t>(n));
  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int64_t x, int64_t y) { return w.at(x, x) < w.at(y, y); });
  Tensor sorted({n, n});
  for (int64_t j = 0; j < n; ++j) {
    values[static_cast<size_t>(j)] = w.at(order[static_cast<size_t>(j)],
                                          order[static_cast<size_t>(j)]);
    for (int64_t i = 0; i < n; ++i)
      sorted.at(i, j) = vectors.at(i, order[static_cast<size_t>(j)]);
  }
  vectors = std::move(sorted);
}

Tensor sqrtm_spd(const Tensor& a) { return sqrtm_impl(a, SqrtMode::kForward); }

Tensor inv_sqrtm_spd(const Tensor& a) {
  return sqrtm_impl(a, SqrtMode::kInverse);
}

double bw2(const Gaussian& g1, const Gaussian& g2) {
  if (!g1.cov.same_shape(g2.cov))
    throw NumericError("bw2 dimension mismatch: " + g1.cov.shape_str() +
                       " vs " + g2.cov.shape_str());
  double mean2 = 0.0;
  for (int64_t i = 0; i < g1.mean.size(); ++i) {
    const double d = g1.mean[i] - g2.mean[i];
    mean2 += d * d;
  }
  return mean2 + cov_bw2(g1.cov, g2.cov);
}

GaussianBarycenter gaussian_barycenter(const std::vector<Gaussian>& gs,
                                       const std::vector<double>& weights,
                                       double tol, int64_t max_iter) {
  if (gs.empty()) throw ConfigError("gaussian barycenter of zero components");
  if (weights.size() != gs.size())
    throw ConfigError("got " + std::to_string(weights.size()) +
                      " weights for " + std::to_string(gs.size()) +
                      " gaussians");
  double wsum = 0.0;
  for (double w : weights) {
    if (w <= 0.0) throw ConfigError("barycenter weights must be positive");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw ConfigError("barycenter weights must sum to 1, got " +
                      std::to_string(wsum));
  const int64_t d = dim_of(gs.front().cov);
  for (const Gaussian& g : gs)
    if (dim_of(g.cov) != d)
      throw NumericError("mixed dimensions in gaussian barycenter");

  Tensor mean({d});
  for (size_t k = 0; k < gs.size(); ++k)
    for (int64_t i = 0; i < d; ++i) mean[i] += weights[k] * gs[k].mean[i];

  Tensor cov({d, d});
  for (size_t k = 0; k < gs.size(); ++k)
    kernels::axpy(weights[k], gs[k].cov.data(), cov.data(), cov.size());

  GaussianBarycenter result;
  for (int64_t it = 1; it <= max_iter; ++it) {
    const Tensor root = sqrtm_spd(cov);
    const Tensor inv_root = inv_sqrtm_spd(cov);
    Tensor mixed({d, d});
    for (size_t k = 0; k < gs.size(); ++k) {
      const Tensor inner = sqrtm_spd(matmul(matmul(root, gs[k].cov), root));
      kernels::axpy(weights[k], inner.data(), mixed.data(), mixed.size());
    }
    Tensor next = matmul(matmul(inv_root, matmul(mixed, mixed)), inv_root);
    symmetrize(next);
    const double residual = cov_bw2(cov, next);
    cov = std::move(next);
    if (residual <= tol) {
      result.iterations = it;
      result.residual = residual;
      result.bary = make_gaussian(std::move(mean), std::move(cov));
      return result;
    }
  }
  throw NumericError("gaussian barycenter did not converge in " +
                     std::to_string(max_iter) + " iterations");
}

LinearMap gaussian_monge_map(const Gaussian& from, const Gaussian& to) {
  if (!from.cov.same_shape(to.cov))
    throw NumericError("monge map dimension mismatch");
  const int64_t d = dim_of(from.cov);
  const Tensor root = sqrtm_spd(from.cov);
  const Tensor inv_root = inv_sqrtm_spd(from.cov);
  const Tensor cross = sqrtm_spd(matmul(matmul(root, to.cov), root));
  Tensor a = matmul(matmul(inv_root, cross), inv_root);
  symmetrize(a);
  Tensor shift({d});
  for (int64_t i = 0; i < d; ++i) {
    double ax = 0.0;
    for (int64_t j = 0; j < d; ++j) ax += a.at(i, j) * from.mean[j];
    shift[i] = to.mean[i] - ax;
  }
  return LinearMap{std::move(a), std::move(shift)};
}

Tensor apply_linear_map(const LinearMap& map, const Tensor& pts) {
  const int64_t n = pts.rows(), d = pts.cols();
  if (d != map.a.rows())
    throw NumericError("linear map expects dim " +
                       std::to_string(map.a.rows()) + ", got " +
                       pts.shape_str());
  Tensor out({n, d});
  kernels::gemm_nt(pts.data(), map.a.data(), out.data(), n, d, d);
  kernels::add_bias(out.data(), map.shift.data(), out.data(), n, d);
  return out;
}

Gaussian fit_gaussian(const Tensor& samples) {
  const int64_t n = samples.rows(), d = samples.cols();
  if (n <= d)
    throw NumericError("need more than " + std::to_string(d) +
                       " samples to fit a " + std::to_string(d) +
                       "-d gaussian, got " + std::to_string(n));
  Tensor mean({d});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < d; ++j) mean[j] += samples.at(i, j);
  for (int64_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(n);

  Tensor centered({n, d});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < d; ++j)
      centered.at(i, j) = samples.at(i, j) - mean[j];
  Tensor cov({d, d});
  kernels::gemm_tn(centered.data(), centered.data(), cov.data(), d, n, d);
  const double scale = 1.0 / static_cast<double>(n - 1);
  for (int64_t i = 0; i < cov.size(); ++i) cov[i] *= scale;
  symmetrize(cov);
  check_spd(cov, "sample covariance");
  return Gaussian{std::move(mean), std::move(cov)};
}

}  // namespace unotb
