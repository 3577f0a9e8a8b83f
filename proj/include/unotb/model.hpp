#pragma once

#include <utility>
#include <vector>

#include "unotb/mlp.hpp"
#include "unotb/rng.hpp"
#include "unotb/tape.hpp"
#include "unotb/tensor.hpp"

namespace unotb {

// Dual potentials f_1..f_K tied together so that sum_k lambda_k f_k is the
// constant m everywhere. Each f_k is a fixed linear combination of K free
// scalar nets plus a share of m:
//   f_k = g_k - sum_{n != k} lambda_n / (lambda_k (K-1)) g_n + m/(K lambda_k)
// which makes the constraint hold identically for any parameter values.
struct PotentialBank {
  std::vector<Mlp> g;          // K nets, scalar output
  Tensor m = Tensor::scalar(0.0);
  std::vector<double> lambda;  // positive, sums to 1

  // hidden = widths of the hidden layers only.
  static PotentialBank create(int64_t dim, const std::vector<int64_t>& hidden,
                              std::vector<double> lambda, Rng& rng);

  int64_t K() const { return static_cast<int64_t>(g.size()); }
  double coeff(int64_t k, int64_t n) const;
  double m_coeff(int64_t k) const;

  Tensor f_eval(int64_t k, const Tensor& y) const;     // [B,D] -> [B,1]
  int f_on_tape(Tape& tape, int64_t k, int y_node, bool train_params) const;
};

// max_pts |sum_k lambda_k f_k(y) - m|; zero up to roundoff by construction.
double congruence_residual(const PotentialBank& bank, const Tensor& pts);

// Transport maps T_1..T_K. Stochastic maps take [x | z] with z a
// noise_dim-dimensional standard normal draw.
struct MapBank {
  std::vector<Mlp> t;
  bool stochastic = false;
  int64_t noise_dim = 0;

  static MapBank create(int64_t dim, const std::vector<int64_t>& hidden,
                        int64_t K, bool stochastic, int64_t noise_dim,
                        Rng& rng);

  int64_t K() const { return static_cast<int64_t>(t.size()); }
  Tensor map_eval(int64_t k, const Tensor& x) const;
  Tensor map_eval(int64_t k, const Tensor& x, const Tensor& noise) const;
};

// Flat views for checkpointing; names are g{k}/w{l}, g{k}/b{l}, m, T{k}/w{l},
// T{k}/b{l} with k starting at 1.
std::vector<std::pair<std::string, const Tensor*>> bank_tensors(
    const PotentialBank& pot, const MapBank& maps);

// Fills pre-shaped banks from a checkpoint; name or shape mismatches raise
// IoError.
void load_banks(const std::string& path, PotentialBank& pot, MapBank& maps);

}  // namespace unotb
