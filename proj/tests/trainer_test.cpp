#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "unotb/error.hpp"
#include "unotb/model.hpp"
#include "unotb/trainer.hpp"

using namespace unotb;
using namespace unotb::testutil;

namespace {

BatchSampler normal_cloud(double mean, double sd, int64_t dim) {
  return [=](int64_t n, Rng& rng) {
    Tensor x({n, dim});
    for (int64_t i = 0; i < x.size(); ++i) x[i] = mean + sd * rng.normal();
    return x;
  };
}

TrainConfig small_config(int64_t iters) {
  TrainConfig cfg;
  cfg.dim = 1;
  cfg.batch = 16;
  cfg.iters = iters;
  cfg.inner_iters = 2;
  cfg.f_hidden = {8};
  cfg.t_hidden = {16};
  cfg.marginals.resize(2);
  cfg.marginals[0].lambda = cfg.marginals[1].lambda = 0.5;
  return cfg;
}

bool banks_equal(const TrainResult& a, const TrainResult& b) {
  const auto ta = bank_tensors(a.pot, a.maps);
  const auto tb = bank_tensors(b.pot, b.maps);
  if (ta.size() != tb.size()) return false;
  for (size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].first != tb[i].first) return false;
    if (!bitwise_equal(*ta[i].second, *tb[i].second)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("training is bitwise reproducible per seed") {
  TrainConfig cfg = small_config(12);
  cfg.seed = 99;
  const std::vector<BatchSampler> src{normal_cloud(-1.0, 0.5, 1),
                                      normal_cloud(1.0, 0.5, 1)};
  const TrainResult a = train(cfg, src);
  const TrainResult b = train(cfg, src);
  CHECK(banks_equal(a, b));
  CHECK(a.report.potential_loss == b.report.potential_loss);
  CHECK(a.report.map_loss == b.report.map_loss);
  CHECK(a.report.m_trace == b.report.m_trace);

  cfg.seed = 100;
  const TrainResult c = train(cfg, src);
  CHECK(!banks_equal(a, c));

  REQUIRE(a.report.potential_loss.size() == 12);
  REQUIRE(a.report.map_loss.size() == 2);
  CHECK(a.report.map_loss[0].size() == 12);
  CHECK(a.report.m_trace.size() == 12);
  CHECK(a.report.wall_time_sec > 0.0);
}

TEST_CASE("balanced marginals leave m untouched") {
  // With even weights and a power-of-two batch the m gradient cancels in
  // exact floating point, so Adam never moves it off the origin.
  TrainConfig cfg = small_config(25);
  cfg.seed = 3;
  const std::vector<BatchSampler> src{normal_cloud(0.0, 1.0, 1),
                                      normal_cloud(2.0, 1.0, 1)};
  const TrainResult r = train(cfg, src);
  for (const double m : r.report.m_trace) CHECK(m == 0.0);
}

TEST_CASE("identical marginals drive the maps toward the identity") {
  TrainConfig cfg = small_config(300);
  cfg.seed = 7;
  const std::vector<BatchSampler> src{normal_cloud(0.0, 1.0, 1),
                                      normal_cloud(0.0, 1.0, 1)};
  const TrainResult r = train(cfg, src);

  Rng rng(123, "probe");
  Tensor x({512, 1});
  for (int64_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
  for (int64_t k = 0; k < 2; ++k) {
    const Tensor y = r.maps.map_eval(k, x);
    double dev = 0.0;
    for (int64_t i = 0; i < x.size(); ++i) {
      const double d = y[i] - x[i];
      dev += d * d;
    }
    dev /= double(x.rows());
    CHECK(dev < 0.1);  // untrained nets sit near zero, i.e. dev ~ 1
  }

  // The trained potentials still satisfy the congruence identity.
  CHECK(congruence_residual(r.pot, x) < 1e-10);
}

TEST_CASE("mixed divergences keep the congruence identity after training") {
  TrainConfig cfg = small_config(40);
  cfg.seed = 21;
  cfg.marginals[0].lambda = 0.25;
  cfg.marginals[1].lambda = 0.75;
  cfg.marginals[1].div.kind = DivKind::kKl;
  cfg.marginals[1].div.tau = 2.0;
  const std::vector<BatchSampler> src{normal_cloud(-1.0, 0.7, 1),
                                      normal_cloud(1.0, 0.7, 1)};
  const TrainResult r = train(cfg, src);
  Rng rng(5, "probe");
  Tensor pts({256, 1});
  for (int64_t i = 0; i < pts.size(); ++i) pts[i] = 3.0 * rng.normal();
  CHECK(congruence_residual(r.pot, pts) < 1e-10);
  CHECK(std::isfinite(r.report.potential_loss.back()));
}

TEST_CASE("stochastic maps train deterministically") {
  TrainConfig cfg = small_config(6);
  cfg.dim = 2;
  cfg.stochastic = true;
  cfg.noise_dim = 2;
  cfg.noise_draws = 2;
  cfg.seed = 17;
  const std::vector<BatchSampler> src{normal_cloud(0.0, 1.0, 2),
                                      normal_cloud(1.0, 1.0, 2)};
  const TrainResult a = train(cfg, src);
  const TrainResult b = train(cfg, src);
  CHECK(banks_equal(a, b));
  // Stochastic maps consume [x | z].
  CHECK(a.maps.t[0].in_dim() == 4);
  CHECK(a.maps.t[0].out_dim() == 2);
}

TEST_CASE("a runaway learning rate trips the loss guard") {
  TrainConfig cfg = small_config(60);
  cfg.seed = 31;
  cfg.lr_f = 1e7;
  cfg.clip_norm = 1e12;
  const std::vector<BatchSampler> src{normal_cloud(0.0, 1.0, 1),
                                      normal_cloud(0.0, 1.0, 1)};
  CHECK_THROWS_AS(train(cfg, src), NumericError);
}

TEST_CASE("invalid configurations are rejected up front") {
  const std::vector<BatchSampler> src{normal_cloud(0.0, 1.0, 1),
                                      normal_cloud(0.0, 1.0, 1)};
  TrainConfig cfg = small_config(5);

  TrainConfig bad = cfg;
  bad.marginals.resize(1);
  CHECK_THROWS_AS(train(bad, {src[0]}), ConfigError);

  bad = cfg;
  bad.marginals[0].lambda = 0.7;  // sums to 1.2
  CHECK_THROWS_AS(train(bad, src), ConfigError);

  bad = cfg;
  bad.noise_draws = 4;  // without stochastic = true
  CHECK_THROWS_AS(train(bad, src), ConfigError);

  bad = cfg;
  bad.stochastic = true;
  bad.noise_dim = 0;
  CHECK_THROWS_AS(train(bad, src), ConfigError);

  CHECK_THROWS_AS(train(cfg, {src[0]}), ConfigError);  // sampler count
}
