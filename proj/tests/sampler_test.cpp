#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "unotb/error.hpp"
#include "unotb/sampler.hpp"

using namespace unotb;
using namespace unotb::testutil;

namespace {

// One-dimensional banks with no hidden layers so every value is exact:
// T_k(x) = x and f_1(x) = slope * x + intercept (g_2 = 0, m = 0, even
// weights make f_1 = g_1).
struct Rig {
  PotentialBank pot;
  MapBank maps;
  MarginalConfig marginal;

  explicit Rig(double slope, double intercept) {
    Rng rng(0, "rig");
    pot = PotentialBank::create(1, {}, {0.5, 0.5}, rng);
    maps = MapBank::create(1, {}, 2, false, 0, rng);
    for (int k = 0; k < 2; ++k) {
      pot.g[size_t(k)].weights[0].fill(k == 0 ? slope : 0.0);
      pot.g[size_t(k)].biases[0].fill(k == 0 ? intercept : 0.0);
      maps.t[size_t(k)].weights[0].fill(1.0);
      maps.t[size_t(k)].biases[0].fill(0.0);
    }
    pot.m[0] = 0.0;
    marginal.lambda = 0.5;
  }
};

Tensor points(std::initializer_list<double> xs) {
  Tensor t({int64_t(xs.size()), 1});
  int64_t i = 0;
  for (const double v : xs) t[i++] = v;
  return t;
}

BatchSampler coin_source(double lo, double hi) {
  return [=](int64_t n, Rng& rng) {
    Tensor x({n, 1});
    for (int64_t i = 0; i < n; ++i) x[i] = rng.below(2) ? hi : lo;
    return x;
  };
}

}  // namespace

TEST_CASE("identity maps reduce the c-transform to the negated potential") {
  const Rig rig(-1.0, 1.0);  // f_1(x) = 1 - x
  const Tensor fc = ctransform_rows(rig.pot, rig.maps, rig.marginal.cost, 0,
                                    points({1.0, 2.0, 5.0}), 1, nullptr);
  CHECK(fc[0] == 0.0);
  CHECK(fc[1] == 1.0);
  CHECK(fc[2] == 4.0);
}

TEST_CASE("balanced marginals accept every candidate") {
  Rig rig(-1.0, 1.0);
  rig.marginal.div.kind = DivKind::kBalanced;
  const auto w = acceptance_weights(rig.pot, rig.maps, rig.marginal, 0,
                                    points({1.0, 2.0, 7.0}));
  for (int64_t i = 0; i < 3; ++i) CHECK(w.weights[i] == 1.0);
  CHECK(w.c_rej == 1.0);

  SamplerConfig cfg;
  cfg.pool = 200;
  const auto res = rejection_sample(rig.pot, rig.maps, rig.marginal, 0,
                                    coin_source(1.0, 2.0), 200, 42, cfg);
  CHECK(res.acceptance_rate == 1.0);
  CHECK(res.candidates == 200);
  CHECK(bitwise_equal(res.samples, res.accepted));  // identity map
}

TEST_CASE("kl weights follow the exponential of the negated c-transform") {
  Rig rig(-1.0, 1.0);
  rig.marginal.div.kind = DivKind::kKl;
  rig.marginal.div.tau = 1.0;
  const auto w = acceptance_weights(rig.pot, rig.maps, rig.marginal, 0,
                                    points({1.0, 2.0}));
  CHECK(w.weights[0] == 1.0);
  CHECK(w.weights[1] == std::exp(-1.0));
  CHECK(w.c_rej == 1.0);
}

TEST_CASE("two-point kl thinning reproduces the rejection composition") {
  // Weights (1, e^-1) over an even two-point source: the accepted set should
  // contain the low point with frequency 1/(1 + e^-1) ~ 0.731.
  Rig rig(-1.0, 1.0);
  rig.marginal.div.kind = DivKind::kKl;
  rig.marginal.div.tau = 1.0;
  const int64_t n = 3000;
  const auto res = rejection_sample(rig.pot, rig.maps, rig.marginal, 0,
                                    coin_source(1.0, 2.0), n, 7);
  int64_t low = 0;
  for (int64_t i = 0; i < n; ++i) low += (res.accepted[i] == 1.0);
  const double target = 1.0 / (1.0 + std::exp(-1.0));
  const double band = 3.0 * std::sqrt(target * (1.0 - target) / double(n));
  CHECK(std::abs(double(low) / double(n) - target) < band);
  // The thinning throws candidates away, so the realized rate sits between
  // the two weights.
  CHECK(res.acceptance_rate < 1.0);
  CHECK(res.acceptance_rate > std::exp(-1.0) / 2.0);
}

TEST_CASE("chi-square weights clip to zero beyond the support edge") {
  Rig rig(-1.0, 1.0);
  rig.marginal.div.kind = DivKind::kChiSq;
  rig.marginal.div.tau = 1.0;
  const auto w = acceptance_weights(rig.pot, rig.maps, rig.marginal, 0,
                                    points({1.0, 2.0, 4.0}));
  CHECK(w.weights[0] == 1.0);
  CHECK(w.weights[1] == 0.5);  // 1 - fc/2 with fc = 1
  CHECK(w.weights[2] == 0.0);  // clipped: 1 - 3/2 < 0

  // Points with zero weight never survive the thinning.
  const auto res = rejection_sample(rig.pot, rig.maps, rig.marginal, 0,
                                    coin_source(1.0, 4.0), 500, 11);
  for (int64_t i = 0; i < 500; ++i) CHECK(res.accepted[i] == 1.0);
}

TEST_CASE("resampling is reproducible per seed") {
  Rig rig(-1.0, 1.0);
  rig.marginal.div.kind = DivKind::kKl;
  rig.marginal.div.tau = 1.0;
  const auto a = rejection_sample(rig.pot, rig.maps, rig.marginal, 0,
                                  coin_source(1.0, 2.0), 400, 5);
  const auto b = rejection_sample(rig.pot, rig.maps, rig.marginal, 0,
                                  coin_source(1.0, 2.0), 400, 5);
  const auto c = rejection_sample(rig.pot, rig.maps, rig.marginal, 0,
                                  coin_source(1.0, 2.0), 400, 6);
  CHECK(bitwise_equal(a.accepted, b.accepted));
  CHECK(a.candidates == b.candidates);
  CHECK(!bitwise_equal(a.accepted, c.accepted));
}

TEST_CASE("vanishing weights raise a degenerate-acceptance error") {
  const Rig rig(0.0, -1000.0);  // f = -1000, so kl weights underflow to zero
  MarginalConfig kl = rig.marginal;
  kl.div.kind = DivKind::kKl;
  kl.div.tau = 1.0;
  CHECK_THROWS_AS(
      acceptance_weights(rig.pot, rig.maps, kl, 0, points({1.0, 2.0})),
      NumericError);
}

TEST_CASE("a starved sampler aborts at the candidate cap") {
  // Weights (1, e^-12) over an even source pin the acceptance rate at ~0.5;
  // asking for more than the cap can deliver with min_rate above that makes
  // the cap check fire.
  Rig rig(-12.0, 12.0);  // f = 12 - 12x, so fc = 12(x - 1)
  rig.marginal.div.kind = DivKind::kKl;
  rig.marginal.div.tau = 1.0;
  SamplerConfig cfg;
  cfg.max_candidates = 20000;
  cfg.min_rate = 0.6;
  CHECK_THROWS_AS(rejection_sample(rig.pot, rig.maps, rig.marginal, 0,
                                   coin_source(1.0, 2.0), 50000, 9, cfg),
                  NumericError);
}

TEST_CASE("stochastic estimates demand a noise stream") {
  Rng rng(0, "sto");
  const PotentialBank pot = PotentialBank::create(2, {4}, {0.5, 0.5}, rng);
  const MapBank maps = MapBank::create(2, {4}, 2, true, 2, rng);
  CHECK_THROWS_AS(
      ctransform_rows(pot, maps, CostFn{}, 0, Tensor({3, 2}), 1, nullptr),
      NumericError);
}
