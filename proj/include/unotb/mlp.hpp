#pragma once

#include <string>
#include <vector>

#include "unotb/rng.hpp"
#include "unotb/tape.hpp"
#include "unotb/tensor.hpp"

namespace unotb {

// Fully connected net: ReLU on hidden layers, linear output. Weights are
// stored input-major ([fan_in, fan_out]) so the forward pass is a plain
// row-batch GEMM per layer.
struct Mlp {
  std::vector<int64_t> widths;
  std::vector<Tensor> weights;  // weights[l]: [widths[l], widths[l+1]]
  std::vector<Tensor> biases;   // biases[l]:  [1, widths[l+1]]

  // Glorot-uniform weights, zero biases.
  static Mlp create(std::vector<int64_t> widths, Rng& rng);

  int64_t in_dim() const { return widths.front(); }
  int64_t out_dim() const { return widths.back(); }
  int64_t layer_count() const { return static_cast<int64_t>(weights.size()); }

  // Records the forward pass; parameters become (shared) leaves with
  // requires_grad = train_params.
  int on_tape(Tape& tape, int x, bool train_params) const;

  // Tape-free forward for inference paths.
  Tensor eval(const Tensor& x) const;

  // Appends parameter pointers and "prefix/w0", "prefix/b0", ... names.
  void collect_params(const std::string& prefix, std::vector<Tensor*>& params,
                      std::vector<std::string>& names);
};

}  // namespace unotb
