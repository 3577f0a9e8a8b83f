#include "unotb/mlp.hpp"

#include <cmath>

#include "unotb/error.hpp"
#include "unotb/kernels.hpp"

namespace unotb {

Mlp Mlp::create(std::vector<int64_t> widths, Rng& rng) {
  if (widths.size() < 2)
    throw ConfigError("mlp needs at least input and output widths");
  for (const int64_t w : widths)
    if (w < 1) throw ConfigError("mlp widths must be positive");
  Mlp net;
  net.widths = std::move(widths);
  for (size_t l = 0; l + 1 < net.widths.size(); ++l) {
    const int64_t fan_in = net.widths[l], fan_out = net.widths[l + 1];
    Tensor w({fan_in, fan_out});
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (int64_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-limit, limit);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Tensor({1, fan_out}));
  }
  return net;
}

int Mlp::on_tape(Tape& tape, int x, bool train_params) const {
  if (tape.value(x).cols() != in_dim())
    throw NumericError("mlp input has " +
                       std::to_string(tape.value(x).cols()) +
                       " columns, expected " + std::to_string(in_dim()));
  int h = x;
  for (size_t l = 0; l < weights.size(); ++l) {
    const int w = tape.leaf(&weights[l], train_params);
    const int b = tape.leaf(&biases[l], train_params);
    h = tape.linear(h, w, b);
    if (l + 1 < weights.size()) h = tape.relu(h);
  }
  return h;
}

Tensor Mlp::eval(const Tensor& x) const {
  if (x.cols() != in_dim())
    throw NumericError("mlp input has " + std::to_string(x.cols()) +
                       " columns, expected " + std::to_string(in_dim()));
  const int64_t rows = x.rows();
  Tensor cur = x;
  for (size_t l = 0; l < weights.size(); ++l) {
    const int64_t out = widths[l + 1];
    Tensor next({rows, out});
    kernels::gemm_nn(cur.data(), weights[l].data(), next.data(), rows,
                     widths[l], out);
    kernels::add_bias(next.data(), biases[l].data(), next.data(), rows, out);
    if (l + 1 < weights.size())
      kernels::relu_fwd(next.data(), next.data(), next.size());
    cur = std::move(next);
  }
  return cur;
}

void Mlp::collect_params(const std::string& prefix,
                         std::vector<Tensor*>& params,
                         std::vector<std::string>& names) {
  for (size_t l = 0; l < weights.size(); ++l) {
    params.push_back(&weights[l]);
    names.push_back(prefix + "/w" + std::to_string(l));
    params.push_back(&biases[l]);
    names.push_back(prefix + "/b" + std::to_string(l));
  }
}

}  // namespace unotb
