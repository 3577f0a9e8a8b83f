#pragma once

#include <cstdint>

#include "unotb/model.hpp"
#include "unotb/rng.hpp"
#include "unotb/trainer.hpp"

namespace unotb {

// Inference-side resampling. A trained pair (potentials, maps) induces for
// marginal k the c-transform estimate
//   fc(x) = E_s[ c(x, T_k(x,s)) - f_k(T_k(x,s)) ]
// and the unnormalized acceptance weight w(x) = conj_grad(div_k, -fc(x)),
// the density ratio the relaxed marginal puts on x. Thinning candidates with
// probability w/c_rej turns input samples into barycenter-aligned ones;
// balanced marginals give w = 1 and accept everything.

struct SamplerConfig {
  int64_t noise_draws = 1;          // draws behind each c-transform estimate
  int64_t pool = 4096;              // candidates scored per round
  int64_t max_candidates = 1000000;
  double min_rate = 1e-4;           // abort threshold, checked at the cap
};

// [B, D] -> [B, 1] c-transform estimates. noise_rng may be null for
// deterministic maps.
Tensor ctransform_rows(const PotentialBank& pot, const MapBank& maps,
                       const CostFn& cost, int64_t k, const Tensor& x,
                       int64_t noise_draws, Rng* noise_rng);

struct AcceptanceWeights {
  Tensor weights;      // [B, 1]
  double c_rej = 0.0;  // max weight over the scored pool
};

// Weights for one candidate pool; c_rej is taken over that same pool.
// Throws NumericError if every weight vanishes.
AcceptanceWeights acceptance_weights(const PotentialBank& pot,
                                     const MapBank& maps,
                                     const MarginalConfig& marginal, int64_t k,
                                     const Tensor& x,
                                     const SamplerConfig& cfg = {},
                                     Rng* noise_rng = nullptr);

struct RejectionResult {
  Tensor accepted;        // accepted inputs, [n_target, D]
  Tensor samples;         // their images under T_k, [n_target, D]
  int64_t candidates = 0;  // total candidates drawn
  double acceptance_rate = 0.0;
};

// Draws candidates from `source` until n_target are accepted. Deterministic
// for a fixed seed: the accepted index set depends only on seed and inputs.
RejectionResult rejection_sample(const PotentialBank& pot, const MapBank& maps,
                                 const MarginalConfig& marginal, int64_t k,
                                 const BatchSampler& source, int64_t n_target,
                                 uint64_t seed,
                                 const SamplerConfig& cfg = {});

}  // namespace unotb
