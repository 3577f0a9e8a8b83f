#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "unotb/adam.hpp"
#include "unotb/cost.hpp"
#include "unotb/divergence.hpp"
#include "unotb/model.hpp"
#include "unotb/rng.hpp"

namespace unotb {

struct MarginalConfig {
  double lambda = 0.5;
  Divergence div;
  CostFn cost;
};

struct TrainConfig {
  int64_t dim = 2;
  int64_t batch = 256;
  int64_t iters = 10000;
  int64_t inner_iters = 3;  // map descent steps per potential ascent step
  double lr_f = 1e-3;
  double lr_t = 1e-3;
  double lr_m = 1e-3;
  double beta1 = 0.0;
  double beta2 = 0.9;
  double clip_norm = 100.0;
  bool stochastic = false;
  int64_t noise_dim = 0;
  int64_t noise_draws = 1;  // inner-expectation samples per input point
  std::vector<int64_t> f_hidden = {128, 128, 128};
  std::vector<int64_t> t_hidden = {128, 128, 128};
  uint64_t seed = 0;
  std::vector<MarginalConfig> marginals;

  void validate() const;  // throws ConfigError
};

// Draws a [n, dim] batch from marginal k using the supplied stream.
using BatchSampler = std::function<Tensor(int64_t n, Rng& rng)>;

struct TrainReport {
  std::vector<double> potential_loss;         // one entry per outer iteration
  std::vector<std::vector<double>> map_loss;  // [K][iters], inner-step means
  std::vector<double> m_trace;
  double wall_time_sec = 0.0;
  int64_t iters = 0;
};

struct TrainResult {
  PotentialBank pot;
  MapBank maps;
  TrainReport report;
};

// Alternating scheme: one potential ascent step on the congruent potentials
// and m, then inner_iters descent steps on the maps against the frozen
// potentials. Deterministic for a fixed config and seed. Throws NumericError
// if a loss passes 1e8 in magnitude or a gradient goes non-finite.
TrainResult train(const TrainConfig& cfg,
                  const std::vector<BatchSampler>& samplers);

}  // namespace unotb
