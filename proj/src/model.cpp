#include "unotb/model.hpp"

#include <cmath>
#include <map>

#include "unotb/checkpoint.hpp"
#include "unotb/error.hpp"

namespace unotb {

namespace {
std::vector<int64_t> net_widths(int64_t in, const std::vector<int64_t>& hidden,
                                int64_t out) {
  std::vector<int64_t> w;
  w.push_back(in);
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

void check_lambda(const std::vector<double>& lambda) {
  if (lambda.size() < 2)
    throw ConfigError("need at least two marginals, got " +
                      std::to_string(lambda.size()));
  double sum = 0.0;
  for (const double l : lambda) {
    if (!(l > 0.0))
      throw ConfigError("marginal weights must be positive, got " +
                        std::to_string(l));
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("marginal weights must sum to 1, got " +
                      std::to_string(sum));
}
}  // namespace

PotentialBank PotentialBank::create(int64_t dim,
                                    const std::vector<int64_t>& hidden,
                                    std::vector<double> lambda, Rng& rng) {
  check_lambda(lambda);
  PotentialBank bank;
  bank.lambda = std::move(lambda);
  const auto widths = net_widths(dim, hidden, 1);
  for (size_t k = 0; k < bank.lambda.size(); ++k)
    bank.g.push_back(Mlp::create(widths, rng));
  return bank;
}

double PotentialBank::coeff(int64_t k, int64_t n) const {
  if (n == k) return 1.0;
  return -lambda[static_cast<size_t>(n)] /
         (lambda[static_cast<size_t>(k)] * static_cast<double>(K() - 1));
}

double PotentialBank::m_coeff(int64_t k) const {
  return 1.0 / (static_cast<double>(K()) * lambda[static_cast<size_t>(k)]);
}

Tensor PotentialBank::f_eval(int64_t k, const Tensor& y) const {
  Tensor acc = g[static_cast<size_t>(k)].eval(y);
  for (int64_t n = 0; n < K(); ++n) {
    if (n == k) continue;
    const Tensor gn = g[static_cast<size_t>(n)].eval(y);
    const double c = coeff(k, n);
    for (int64_t i = 0; i < acc.size(); ++i) acc[i] += c * gn[i];
  }
  const double shift = m_coeff(k) * m[0];
  for (int64_t i = 0; i < acc.size(); ++i) acc[i] += shift;
  return acc;
}

int PotentialBank::f_on_tape(Tape& tape, int64_t k, int y_node,
                             bool train_params) const {
  int acc = g[static_cast<size_t>(k)].on_tape(tape, y_node, train_params);
  for (int64_t n = 0; n < K(); ++n) {
    if (n == k) continue;
    const int gn = g[static_cast<size_t>(n)].on_tape(tape, y_node, train_params);
    acc = tape.add_scaled(acc, gn, coeff(k, n));
  }
  const int m_node = tape.leaf(&m, train_params);
  return tape.add_scalar(acc, m_node, m_coeff(k));
}

double congruence_residual(const PotentialBank& bank, const Tensor& pts) {
  double worst = 0.0;
  Tensor acc({pts.rows(), 1});
  for (int64_t k = 0; k < bank.K(); ++k) {
    const Tensor fk = bank.f_eval(k, pts);
    for (int64_t i = 0; i < acc.size(); ++i)
      acc[i] += bank.lambda[static_cast<size_t>(k)] * fk[i];
  }
  for (int64_t i = 0; i < acc.size(); ++i)
    worst = std::max(worst, std::abs(acc[i] - bank.m[0]));
  return worst;
}

MapBank MapBank::create(int64_t dim, const std::vector<int64_t>& hidden,
                        int64_t K, bool stochastic, int64_t noise_dim,
                        Rng& rng) {
  if (K < 2) throw ConfigError("need at least two maps");
  if (stochastic && noise_dim < 1)
    throw ConfigError("stochastic maps need noise_dim >= 1");
  MapBank bank;
  bank.stochastic = stochastic;
  bank.noise_dim = stochastic ? noise_dim : 0;
  const auto widths = net_widths(dim + bank.noise_dim, hidden, dim);
  for (int64_t k = 0; k < K; ++k) bank.t.push_back(Mlp::create(widths, rng));
  return bank;
}

Tensor MapBank::map_eval(int64_t k, const Tensor& x) const {
  if (stochastic)
    throw NumericError("stochastic map evaluated without noise");
  return t[static_cast<size_t>(k)].eval(x);
}

Tensor MapBank::map_eval(int64_t k, const Tensor& x,
                         const Tensor& noise) const {
  if (!stochastic) return t[static_cast<size_t>(k)].eval(x);
  if (noise.rows() != x.rows() || noise.cols() != noise_dim)
    throw NumericError("noise shape mismatch: " + noise.shape_str());
  Tensor joined({x.rows(), x.cols() + noise_dim});
  for (int64_t i = 0; i < x.rows(); ++i) {
    for (int64_t j = 0; j < x.cols(); ++j)
      joined.at(i, j) = x.at(i, j);
    for (int64_t j = 0; j < noise_dim; ++j)
      joined.at(i, x.cols() + j) = noise.at(i, j);
  }
  return t[static_cast<size_t>(k)].eval(joined);
}

std::vector<std::pair<std::string, const Tensor*>> bank_tensors(
    const PotentialBank& pot, const MapBank& maps) {
  std::vector<std::pair<std::string, const Tensor*>> out;
  auto add_net = [&out](const std::string& prefix, const Mlp& net) {
    for (size_t l = 0; l < net.weights.size(); ++l) {
      out.emplace_back(prefix + "/w" + std::to_string(l), &net.weights[l]);
      out.emplace_back(prefix + "/b" + std::to_string(l), &net.biases[l]);
    }
  };
  for (int64_t k = 0; k < pot.K(); ++k)
    add_net("g" + std::to_string(k + 1), pot.g[static_cast<size_t>(k)]);
  out.emplace_back("m", &pot.m);
  for (int64_t k = 0; k < maps.K(); ++k)
    add_net("T" + std::to_string(k + 1), maps.t[static_cast<size_t>(k)]);
  return out;
}

void load_banks(const std::string& path, PotentialBank& pot, MapBank& maps) {
  auto stored = load_checkpoint(path);
  std::map<std::string, Tensor*> by_name;
  for (auto& [name, tensor] : stored) by_name.emplace(name, &tensor);

  auto expected = bank_tensors(pot, maps);
  if (by_name.size() != expected.size())
    throw IoError("checkpoint " + path + " holds " +
                  std::to_string(by_name.size()) + " tensors, expected " +
                  std::to_string(expected.size()));
  for (auto& [name, dst_const] : expected) {
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw IoError("checkpoint " + path + " is missing tensor " + name);
    Tensor* dst = const_cast<Tensor*>(dst_const);
    if (!it->second->same_shape(*dst))
      throw IoError("checkpoint tensor " + name + " has shape " +
                    it->second->shape_str() + ", expected " +
                    dst->shape_str());
    *dst = std::move(*it->second);
  }
}

}  // namespace unotb
