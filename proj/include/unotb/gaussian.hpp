#pragma once

#include <cstdint>
#include <vector>

#include "unotb/tensor.hpp"

namespace unotb {

// Closed-form Gaussian transport toolbox: Bures-Wasserstein distance,
// fixed-point barycenter iteration and the induced linear optimal maps.
// Matrix functions go through a cyclic Jacobi symmetric eigensolver;
// dimensions stay small (<= 64) so no external linear algebra is needed.
struct Gaussian {
  Tensor mean;  // [D]
  Tensor cov;   // [D, D], symmetric positive definite
};

// Validates symmetry (1e-10) and positive definiteness.
Gaussian make_gaussian(Tensor mean, Tensor cov);

// Symmetric eigendecomposition A = V diag(w) V^T. A must be symmetric.
void sym_eig(const Tensor& a, Tensor& vectors, std::vector<double>& values);

Tensor sqrtm_spd(const Tensor& a);      // principal square root
Tensor inv_sqrtm_spd(const Tensor& a);  // inverse square root

// Squared Bures-Wasserstein distance:
//   ||mu1 - mu2||^2 + tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2)
double bw2(const Gaussian& g1, const Gaussian& g2);

struct GaussianBarycenter {
  Gaussian bary;
  int64_t iterations = 0;
  double residual = 0.0;  // bw2 change at the last accepted iterate
};

// Fixed-point covariance iteration
//   S <- S^-1/2 (sum_k w_k (S^1/2 S_k S^1/2)^1/2)^2 S^-1/2
// started from sum_k w_k S_k; the mean is sum_k w_k mu_k. Stops when
// successive iterates are bw2-closer than tol; throws NumericError when
// max_iter is exhausted first.
GaussianBarycenter gaussian_barycenter(const std::vector<Gaussian>& gs,
                                       const std::vector<double>& weights,
                                       double tol = 1e-10,
                                       int64_t max_iter = 10000);

// Optimal (linear) transport map x -> mean_to + A (x - mean_from) pushing
// `from` onto `to`:  A = Sf^-1/2 (Sf^1/2 St Sf^1/2)^1/2 Sf^-1/2.
struct LinearMap {
  Tensor a;      // [D, D]
  Tensor shift;  // [D]: T(x) = a x + shift
};
LinearMap gaussian_monge_map(const Gaussian& from, const Gaussian& to);
Tensor apply_linear_map(const LinearMap& map, const Tensor& pts);

// Moment-matched Gaussian (unbiased covariance). Throws NumericError when
// rows <= dim or the sample covariance is numerically singular.
Gaussian fit_gaussian(const Tensor& samples);

}  // namespace unotb
