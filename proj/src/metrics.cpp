#include "unotb/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "unotb/error.hpp"

namespace unotb {

double l2_map_metric(const Tensor& t_hat, const Tensor& t_star) {
  if (!t_hat.same_shape(t_star))
    throw ConfigError("map outputs disagree in shape: " + t_hat.shape_str() +
                      " vs " + t_star.shape_str());
  if (t_hat.rows() == 0) throw ConfigError("no map evaluations given");
  double acc = 0.0;
  for (int64_t i = 0; i < t_hat.size(); ++i) {
    const double d = t_hat[i] - t_star[i];
    acc += d * d;
  }
  return acc / double(t_hat.rows());
}

double total_variance(const Tensor& samples) {
  const int64_t n = samples.rows(), d = samples.cols();
  if (n < 2) throw ConfigError("variance needs at least two samples");
  double acc = 0.0;
  for (int64_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (int64_t r = 0; r < n; ++r) mean += samples.at(r, c);
    mean /= double(n);
    double sq = 0.0;
    for (int64_t r = 0; r < n; ++r) {
      const double z = samples.at(r, c) - mean;
      sq += z * z;
    }
    acc += sq / double(n - 1);
  }
  return acc;
}

double l2_uvp(const Tensor& t_hat, const Tensor& t_star,
              const Tensor& reference) {
  const double var = total_variance(reference);
  if (var <= 0.0)
    throw NumericError("reference samples have zero variance");
  return 100.0 * l2_map_metric(t_hat, t_star) / var;
}

double l2_uvp_weighted(const std::vector<Tensor>& t_hat,
                       const std::vector<Tensor>& t_star,
                       const std::vector<double>& weights,
                       const Tensor& reference) {
  if (t_hat.size() != t_star.size() || t_hat.size() != weights.size())
    throw ConfigError("per-marginal metric inputs disagree in count");
  double acc = 0.0;
  for (size_t k = 0; k < weights.size(); ++k)
    acc += weights[k] * l2_uvp(t_hat[k], t_star[k], reference);
  return acc;
}

namespace {

double bw2_uvp_impl(const Gaussian& estimate, const Gaussian& reference) {
  double var = 0.0;
  for (int64_t i = 0; i < reference.cov.rows(); ++i)
    var += reference.cov.at(i, i);
  if (var <= 0.0)
    throw NumericError("reference distribution has zero variance");
  return 100.0 * bw2(estimate, reference) / (0.5 * var);
}

}  // namespace

double bw2_uvp(const Gaussian& estimate, const Gaussian& reference) {
  return bw2_uvp_impl(estimate, reference);
}

double bw2_uvp(const Tensor& estimate_samples, const Gaussian& reference) {
  return bw2_uvp_impl(fit_gaussian(estimate_samples), reference);
}

double bw2_uvp(const Tensor& estimate_samples,
               const Tensor& reference_samples) {
  return bw2_uvp_impl(fit_gaussian(estimate_samples),
                      fit_gaussian(reference_samples));
}

ClassAcceptance acceptance_stats(const std::vector<double>& weights,
                                 const std::vector<int32_t>& labels) {
  if (weights.empty()) throw ConfigError("no acceptance weights given");
  if (weights.size() != labels.size())
    throw ConfigError("got " + std::to_string(weights.size()) +
                      " weights for " + std::to_string(labels.size()) +
                      " labels");
  ClassAcceptance out;
  out.classes = labels;
  std::sort(out.classes.begin(), out.classes.end());
  out.classes.erase(std::unique(out.classes.begin(), out.classes.end()),
                    out.classes.end());
  out.mean_rate.assign(out.classes.size(), 0.0);
  std::vector<int64_t> counts(out.classes.size(), 0);
  double total = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    const size_t c = size_t(
        std::lower_bound(out.classes.begin(), out.classes.end(), labels[i]) -
        out.classes.begin());
    out.mean_rate[c] += weights[i];
    ++counts[c];
    total += weights[i];
  }
  out.composition.assign(out.classes.size(), 0.0);
  for (size_t c = 0; c < out.classes.size(); ++c) {
    if (total > 0.0) out.composition[c] = out.mean_rate[c] / total;
    out.mean_rate[c] /= double(counts[c]);
  }
  return out;
}

}  // namespace unotb
