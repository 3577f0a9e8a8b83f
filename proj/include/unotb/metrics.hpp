#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unotb/gaussian.hpp"
#include "unotb/tensor.hpp"

namespace unotb {

// Evaluation metrics for learned maps and barycenters: pointwise map error,
// unexplained-variance percentages and per-class acceptance statistics.
struct MetricReport {
  std::string metric;
  double value = 0.0;
  int64_t n = 0;
  uint64_t seed = 0;
  std::string config_hash;
};

// Mean squared deviation between two maps evaluated on the same inputs.
double l2_map_metric(const Tensor& t_hat, const Tensor& t_star);

// Trace of the (unbiased) sample covariance.
double total_variance(const Tensor& samples);

// 100 * l2_map_metric / total_variance(reference samples).
double l2_uvp(const Tensor& t_hat, const Tensor& t_star,
              const Tensor& reference);

// Weighted aggregate over marginals: sum_k w_k * l2_uvp(k).
double l2_uvp_weighted(const std::vector<Tensor>& t_hat,
                       const std::vector<Tensor>& t_star,
                       const std::vector<double>& weights,
                       const Tensor& reference);

// 100 * bw2(fit or given, fit or given) / (0.5 * total variance of the
// reference). The parameter overload is exact: identical inputs give 0.
double bw2_uvp(const Gaussian& estimate, const Gaussian& reference);
double bw2_uvp(const Tensor& estimate_samples, const Gaussian& reference);
double bw2_uvp(const Tensor& estimate_samples, const Tensor& reference_samples);

struct ClassAcceptance {
  std::vector<int32_t> classes;     // sorted distinct labels
  std::vector<double> mean_rate;    // mean acceptance weight per class
  std::vector<double> composition;  // class share of the accepted mass
};

// Per-class acceptance summary for rejection weights grouped by label.
ClassAcceptance acceptance_stats(const std::vector<double>& weights,
                                 const std::vector<int32_t>& labels);

}  // namespace unotb
