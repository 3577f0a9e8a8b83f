#include "unotb/sampler.hpp"

#include <algorithm>
#include <cstring>

#include "unotb/error.hpp"

namespace unotb {

namespace {
Tensor draw_noise(int64_t rows, int64_t cols, Rng& rng) {
  Tensor z({rows, cols});
  for (int64_t i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return z;
}
}  // namespace

Tensor ctransform_rows(const PotentialBank& pot, const MapBank& maps,
                       const CostFn& cost, int64_t k, const Tensor& x,
                       int64_t noise_draws, Rng* noise_rng) {
  const int64_t rows = x.rows();
  Tensor acc({rows, 1});
  const int64_t draws = maps.stochastic ? noise_draws : 1;
  if (maps.stochastic && noise_rng == nullptr)
    throw NumericError("stochastic c-transform estimate needs a noise stream");
  Tensor c_row({rows, 1});
  for (int64_t s = 0; s < draws; ++s) {
    Tensor y;
    if (maps.stochastic) {
      const Tensor z = draw_noise(rows, maps.noise_dim, *noise_rng);
      y = maps.map_eval(k, x, z);
    } else {
      y = maps.map_eval(k, x);
    }
    cost_eval_rows(cost, x, y, c_row);
    const Tensor f = pot.f_eval(k, y);
    for (int64_t i = 0; i < rows; ++i) acc[i] += c_row[i] - f[i];
  }
  const double inv = 1.0 / static_cast<double>(draws);
  for (int64_t i = 0; i < rows; ++i) acc[i] *= inv;
  return acc;
}

AcceptanceWeights acceptance_weights(const PotentialBank& pot,
                                     const MapBank& maps,
                                     const MarginalConfig& marginal, int64_t k,
                                     const Tensor& x, const SamplerConfig& cfg,
                                     Rng* noise_rng) {
  const Tensor fc =
      ctransform_rows(pot, maps, marginal.cost, k, x, cfg.noise_draws,
                      noise_rng);
  AcceptanceWeights out;
  out.weights = Tensor({x.rows(), 1});
  for (int64_t i = 0; i < x.rows(); ++i) {
    out.weights[i] = conj_grad(marginal.div, -fc[i]);
    out.c_rej = std::max(out.c_rej, out.weights[i]);
  }
  if (!(out.c_rej > 0.0))
    throw NumericError(
        "degenerate acceptance: every candidate weight is zero for marginal " +
        std::to_string(k + 1));
  return out;
}

RejectionResult rejection_sample(const PotentialBank& pot, const MapBank& maps,
                                 const MarginalConfig& marginal, int64_t k,
                                 const BatchSampler& source, int64_t n_target,
                                 uint64_t seed, const SamplerConfig& cfg) {
  if (n_target < 1) throw ConfigError("rejection target must be >= 1");
  Rng cand_rng(seed, "reject-candidates");
  Rng coin_rng(seed, "reject-coins");
  Rng noise_rng(seed, "reject-noise");

  RejectionResult res;
  std::vector<double> acc_rows;
  acc_rows.reserve(static_cast<size_t>(n_target) * 2);
  int64_t accepted = 0, dim = -1;

  while (accepted < n_target) {
    const int64_t want = std::max<int64_t>(cfg.pool, n_target - accepted);
    const Tensor x = source(want, cand_rng);
    dim = x.cols();
    const AcceptanceWeights w = acceptance_weights(pot, maps, marginal, k, x,
                                                   cfg, &noise_rng);
    for (int64_t i = 0; i < x.rows() && accepted < n_target; ++i) {
      const double u = coin_rng.uniform();
      ++res.candidates;
      if (u * w.c_rej <= w.weights[i]) {
        const auto row = x.row_span(i);
        acc_rows.insert(acc_rows.end(), row.begin(), row.end());
        ++accepted;
      }
    }
    if (accepted < n_target && res.candidates >= cfg.max_candidates) {
      const double rate =
          static_cast<double>(accepted) / static_cast<double>(res.candidates);
      if (rate < cfg.min_rate)
        throw NumericError("acceptance rate " + std::to_string(rate) +
                           " below " + std::to_string(cfg.min_rate) +
                           " after " + std::to_string(res.candidates) +
                           " candidates for marginal " + std::to_string(k + 1));
    }
  }
  res.acceptance_rate =
      static_cast<double>(accepted) / static_cast<double>(res.candidates);
  res.accepted = Tensor({n_target, dim});
  std::memcpy(res.accepted.data(), acc_rows.data(),
              acc_rows.size() * sizeof(double));
  if (maps.stochastic) {
    const Tensor z = draw_noise(n_target, maps.noise_dim, noise_rng);
    res.samples = maps.map_eval(k, res.accepted, z);
  } else {
    res.samples = maps.map_eval(k, res.accepted);
  }
  return res;
}

}  // namespace unotb
