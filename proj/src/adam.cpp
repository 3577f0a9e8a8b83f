#include "unotb/adam.hpp"

#include <cmath>

#include "unotb/error.hpp"
#include "unotb/kernels.hpp"

namespace unotb {

Adam::Adam(AdamConfig cfg, std::vector<Tensor*> params,
           std::vector<std::string> names)
    : cfg_(cfg), params_(std::move(params)), names_(std::move(names)) {
  if (params_.size() != names_.size())
    throw ConfigError("adam: parameter/name count mismatch");
  if (!(cfg_.lr > 0.0)) throw ConfigError("adam: lr must be positive");
  for (Tensor* p : params_) {
    m_.emplace_back(p->shape());
    v_.emplace_back(p->shape());
  }
}

void Adam::step(const std::vector<Tensor>& grads) {
  if (grads.size() != params_.size())
    throw NumericError("adam: gradient count mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    const Tensor& g = grads[i];
    Tensor& p = *params_[i];
    if (!g.same_shape(p))
      throw NumericError("adam: gradient shape mismatch for " + names_[i]);
    if (!g.all_finite())
      throw NumericError("adam: non-finite gradient for parameter " +
                         names_[i]);
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (int64_t j = 0; j < p.size(); ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

double clip_global_norm(std::vector<Tensor>& grads, double max_norm) {
  double sq = 0.0;
  for (const Tensor& g : grads) sq += kernels::sumsq(g.data(), g.size());
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (Tensor& g : grads)
      for (int64_t j = 0; j < g.size(); ++j) g[j] *= scale;
  }
  return norm;
}

}  // namespace unotb
