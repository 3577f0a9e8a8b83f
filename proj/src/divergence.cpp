#include "unotb/divergence.hpp"

#include <cmath>

#include "unotb/error.hpp"

namespace unotb {

namespace {
constexpr double kExpArgLimit = 700.0;  // exp overflows shortly past this

[[noreturn]] void overflow(double t, double tau) {
  throw NumericError("divergence conjugate overflow: t=" + std::to_string(t) +
                     " exceeds 700*tau with tau=" + std::to_string(tau));
}
}  // namespace

Divergence make_divergence(std::string_view name, double tau) {
  Divergence d;
  if (name == "balanced")
    d.kind = DivKind::kBalanced;
  else if (name == "kl")
    d.kind = DivKind::kKl;
  else if (name == "chi2")
    d.kind = DivKind::kChiSq;
  else if (name == "softplus")
    d.kind = DivKind::kSoftplus;
  else
    throw ConfigError("unknown divergence '" + std::string(name) +
                      "' (expected balanced|kl|chi2|softplus)");
  if (!(tau > 0.0))
    throw ConfigError("divergence tau must be positive, got " +
                      std::to_string(tau));
  d.tau = tau;
  return d;
}

std::string div_kind_name(DivKind kind) {
  switch (kind) {
    case DivKind::kBalanced: return "balanced";
    case DivKind::kKl: return "kl";
    case DivKind::kChiSq: return "chi2";
    case DivKind::kSoftplus: return "softplus";
  }
  return "?";
}

double conj(const Divergence& d, double t) {
  const double tau = d.tau;
  switch (d.kind) {
    case DivKind::kBalanced:
      return t;
    case DivKind::kKl: {
      const double z = t / tau;
      if (z > kExpArgLimit) overflow(t, tau);
      return tau * std::expm1(z);
    }
    case DivKind::kChiSq:
      if (t < -2.0 * tau) return -tau;
      return t + t * t / (4.0 * tau);
    case DivKind::kSoftplus: {
      const double z = t / tau;
      const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z))
                                      : std::log1p(std::exp(z));
      return 2.0 * tau * (softplus - 0.6931471805599453094);
    }
  }
  return 0.0;
}

double conj_grad(const Divergence& d, double t) {
  const double tau = d.tau;
  switch (d.kind) {
    case DivKind::kBalanced:
      return 1.0;
    case DivKind::kKl: {
      const double z = t / tau;
      if (z > kExpArgLimit) overflow(t, tau);
      return std::exp(z);
    }
    case DivKind::kChiSq:
      return std::max(0.0, 1.0 + t / (2.0 * tau));
    case DivKind::kSoftplus:
      return 2.0 / (1.0 + std::exp(-t / tau));
  }
  return 0.0;
}

void conj_rows(const Divergence& d, const Tensor& in, Tensor& out) {
  for (int64_t i = 0; i < in.size(); ++i) out[i] = conj(d, in[i]);
}

void conj_grad_rows(const Divergence& d, const Tensor& in, Tensor& out) {
  for (int64_t i = 0; i < in.size(); ++i) out[i] = conj_grad(d, in[i]);
}

}  // namespace unotb
