#include "unotb/datagen.hpp"

#include <cmath>
#include <numbers>

#include "unotb/error.hpp"
#include "unotb/rng.hpp"

namespace unotb {
namespace {

struct Mode {
  double weight, mx, my, sigma;
};

// Categorical draw + isotropic Gaussian noise per sample; the row order is
// the draw order, so component counts come out multinomial.
Dataset sample_modes(Rng& rng, int64_t n, const std::vector<Mode>& modes) {
  Dataset out;
  out.points = Tensor({n, 2});
  out.labels.resize(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    double cdf = 0.0;
    size_t pick = modes.size() - 1;
    for (size_t k = 0; k < modes.size(); ++k) {
      cdf += modes[k].weight;
      if (u < cdf) {
        pick = k;
        break;
      }
    }
    const Mode& m = modes[pick];
    out.points.at(i, 0) = m.mx + m.sigma * rng.normal();
    out.points.at(i, 1) = m.my + m.sigma * rng.normal();
    out.labels[static_cast<size_t>(i)] = static_cast<int32_t>(pick);
  }
  return out;
}

std::vector<Mode> eight_gaussians() {
  std::vector<Mode> modes;
  for (int k = 0; k < 8; ++k) {
    const double a = std::numbers::pi * double(k) / 4.0;
    modes.push_back({0.125, 4.0 * std::cos(a), 4.0 * std::sin(a), 0.2});
  }
  return modes;
}

// In-distribution modes carry 95% of the mass and labels 0..3; the four
// outlier modes carry the remaining 5% and labels 4..7.
std::vector<Mode> outlier_mixture(const double (*core)[2],
                                  const double (*tail)[2]) {
  std::vector<Mode> modes;
  for (int k = 0; k < 4; ++k) {
    const double w = tail ? 0.95 / 4.0 : 0.25;
    modes.push_back({w, core[k][0], core[k][1], 0.1});
  }
  if (tail)
    for (int k = 0; k < 4; ++k)
      modes.push_back({0.05 / 4.0, tail[k][0], tail[k][1], 0.02});
  return modes;
}

Dataset spiral(Rng& rng, int64_t n) {
  // Archimedean spiral r = 0.35 phi, phi in [1, 4*pi], shrunk so the outer
  // arm ends at radius 2; noise is added after the shrink.
  constexpr double kTurns = 4.0 * std::numbers::pi;
  constexpr double kScale = 2.0 / (0.35 * kTurns);
  Dataset out;
  out.points = Tensor({n, 2});
  out.labels.assign(static_cast<size_t>(n), 0);
  for (int64_t i = 0; i < n; ++i) {
    const double phi = rng.uniform(1.0, kTurns);
    const double r = 0.35 * phi * kScale;
    out.points.at(i, 0) = r * std::cos(phi) + 0.05 * rng.normal();
    out.points.at(i, 1) = r * std::sin(phi) + 0.05 * rng.normal();
  }
  return out;
}

Dataset moons(Rng& rng, int64_t n) {
  // Interleaved half-circles: (cos t, sin t) and (1 - cos t, 1/2 - sin t),
  // t uniform on [0, pi], noise 0.1. Standardized with the population
  // moments of the noiseless curves: mean (1/2, 1/4), variances
  // (3/4, 9/16 - 1/pi).
  constexpr double kMeanX = 0.5, kMeanY = 0.25;
  const double std_x = std::sqrt(0.75);
  const double std_y = std::sqrt(0.5625 - 1.0 / std::numbers::pi);
  Dataset out;
  out.points = Tensor({n, 2});
  out.labels.resize(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const int32_t moon = static_cast<int32_t>(rng.below(2));
    const double t = rng.uniform(0.0, std::numbers::pi);
    double x = moon ? 1.0 - std::cos(t) : std::cos(t);
    double y = moon ? 0.5 - std::sin(t) : std::sin(t);
    x += 0.1 * rng.normal();
    y += 0.1 * rng.normal();
    out.points.at(i, 0) = (x - kMeanX) / std_x;
    out.points.at(i, 1) = (y - kMeanY) / std_y;
    out.labels[static_cast<size_t>(i)] = moon;
  }
  return out;
}

Dataset gaussian_cloud(Rng& rng, int64_t n, const Tensor& mean,
                       const Tensor& cov) {
  if (mean.rank() != 1 || mean.empty())
    throw ConfigError("gaussian dataset needs a rank-1 mean, got " +
                      mean.shape_str());
  const int64_t d = mean.size();
  if (cov.rank() != 2 || cov.rows() != d || cov.cols() != d)
    throw ConfigError("gaussian dataset covariance must be [" +
                      std::to_string(d) + ", " + std::to_string(d) +
                      "], got " + cov.shape_str());
  // Lower Cholesky factor; fails on non-SPD input.
  Tensor chol = Tensor::zeros({d, d});
  for (int64_t j = 0; j < d; ++j) {
    double diag = cov.at(j, j);
    for (int64_t k = 0; k < j; ++k) diag -= chol.at(j, k) * chol.at(j, k);
    if (diag <= 0.0)
      throw NumericError("gaussian dataset covariance is not positive "
                         "definite (pivot " +
                         std::to_string(diag) + ")");
    chol.at(j, j) = std::sqrt(diag);
    for (int64_t i = j + 1; i < d; ++i) {
      double s = cov.at(i, j);
      for (int64_t k = 0; k < j; ++k) s -= chol.at(i, k) * chol.at(j, k);
      chol.at(i, j) = s / chol.at(j, j);
    }
  }
  Dataset out;
  out.points = Tensor({n, d});
  out.labels.assign(static_cast<size_t>(n), 0);
  std::vector<double> z(static_cast<size_t>(d));
  for (int64_t i = 0; i < n; ++i) {
    for (double& zj : z) zj = rng.normal();
    for (int64_t r = 0; r < d; ++r) {
      double acc = mean[r];
      for (int64_t c = 0; c <= r; ++c) acc += chol.at(r, c) * z[static_cast<size_t>(c)];
      out.points.at(i, r) = acc;
    }
  }
  return out;
}

}  // namespace

bool is_outlier_label(const std::string& name, int32_t label) {
  return name.rfind("outlier_", 0) == 0 && label >= 4;
}

Dataset generate(const DatasetSpec& spec) {
  if (spec.n < 1)
    throw ConfigError("dataset size must be >= 1, got " +
                      std::to_string(spec.n));
  Rng rng(spec.seed, spec.name);
  if (spec.name == "spiral") return spiral(rng, spec.n);
  if (spec.name == "moons") return moons(rng, spec.n);
  if (spec.name == "gm8") return sample_modes(rng, spec.n, eight_gaussians());
  if (spec.name == "imbalance_p1")
    return sample_modes(rng, spec.n,
                        {{0.25, -5.0, 4.0, 0.4}, {0.75, -5.0, -4.0, 0.4}});
  if (spec.name == "imbalance_p2")
    return sample_modes(rng, spec.n,
                        {{0.75, 5.0, 4.0, 0.4}, {0.25, 5.0, -4.0, 0.4}});
  if (spec.name == "outlier_p1") {
    static constexpr double core[4][2] = {{-5, -1}, {5, 1}, {1, -5}, {-1, 5}};
    static constexpr double tail[4][2] = {{10, 2}, {10, 1}, {10, 0}, {10, -1}};
    return sample_modes(rng, spec.n, outlier_mixture(core, tail));
  }
  if (spec.name == "outlier_p2") {
    static constexpr double core[4][2] = {{-5, 1}, {5, -1}, {1, 5}, {-1, -5}};
    static constexpr double tail[4][2] = {
        {-10, 1}, {-10, 0}, {10, -1}, {10, -2}};
    return sample_modes(rng, spec.n, outlier_mixture(core, tail));
  }
  if (spec.name == "outlier_p3") {
    static constexpr double core[4][2] = {{-5, 0}, {5, 0}, {0, 5}, {0, -5}};
    return sample_modes(rng, spec.n, outlier_mixture(core, nullptr));
  }
  if (spec.name == "gaussian")
    return gaussian_cloud(rng, spec.n, spec.mean, spec.cov);
  throw ConfigError("unknown dataset '" + spec.name + "'");
}

}  // namespace unotb
