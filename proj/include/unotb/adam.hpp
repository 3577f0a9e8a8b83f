#pragma once

#include <string>
#include <vector>

#include "unotb/tensor.hpp"

namespace unotb {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.0;  // momentum off by default; see trainer defaults
  double beta2 = 0.9;
  double eps = 1e-8;
};

// One optimizer instance per parameter group. Parameter pointers are bound at
// construction and must stay valid; moments are kept per tensor.
class Adam {
 public:
  Adam(AdamConfig cfg, std::vector<Tensor*> params,
       std::vector<std::string> names);

  // grads aligned with the bound parameters. Throws NumericError naming the
  // offending parameter if a gradient is non-finite.
  void step(const std::vector<Tensor>& grads);

  int64_t steps_taken() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<Tensor*> params_;
  std::vector<std::string> names_;
  std::vector<Tensor> m_, v_;
  int64_t t_ = 0;
};

// Scales grads in place so their joint L2 norm is at most max_norm; returns
// the pre-clip norm.
double clip_global_norm(std::vector<Tensor>& grads, double max_norm);

}  // namespace unotb
