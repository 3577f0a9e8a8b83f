#pragma once

#include <string>
#include <string_view>

#include "unotb/tensor.hpp"

namespace unotb {

// Marginal relaxation term. Each marginal carries one of these; the trainer
// and the rejection sampler only ever touch the convex conjugate of the
// underlying penalty and its derivative:
//   balanced  : conj(t) = t                      grad = 1
//   kl        : conj(t) = tau*(exp(t/tau) - 1)   grad = exp(t/tau)
//   chi2      : conj(t) = t + t^2/(4 tau)        grad = max(0, 1 + t/(2 tau))
//               (clamped to -tau below t = -2 tau, where grad hits zero)
//   softplus  : conj(t) = 2 tau*(ln(1+e^(t/tau)) - ln 2)
//               grad = 2 / (1 + e^(-t/tau))
// grad is the density ratio of the relaxed marginal against the input
// measure, which is why it doubles as the rejection-sampling weight.
enum class DivKind { kBalanced, kKl, kChiSq, kSoftplus };

struct Divergence {
  DivKind kind = DivKind::kBalanced;
  double tau = 1.0;
};

// Throws ConfigError on unknown names / non-positive tau.
Divergence make_divergence(std::string_view name, double tau);
std::string div_kind_name(DivKind kind);

// Scalar forms. The KL exponential is evaluated in log-safe form and
// arguments beyond t/tau > 700 raise NumericError instead of overflowing.
double conj(const Divergence& d, double t);
double conj_grad(const Divergence& d, double t);

// Column-vector forms used by the tape; `out` is resized by the caller.
void conj_rows(const Divergence& d, const Tensor& in, Tensor& out);
void conj_grad_rows(const Divergence& d, const Tensor& in, Tensor& out);

}  // namespace unotb
