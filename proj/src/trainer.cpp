#include "unotb/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <string>

#include "unotb/error.hpp"
#include "unotb/tape.hpp"

namespace unotb {

namespace {

constexpr double kLossBlowup = 1e8;

Tensor repeat_rows(const Tensor& x, int64_t times) {
  if (times == 1) return x;
  Tensor out({x.rows() * times, x.cols()});
  for (int64_t i = 0; i < x.rows(); ++i)
    for (int64_t r = 0; r < times; ++r)
      std::memcpy(out.data() + (i * times + r) * x.cols(),
                  x.data() + i * x.cols(),
                  static_cast<size_t>(x.cols()) * sizeof(double));
  return out;
}

Tensor draw_noise(int64_t rows, int64_t cols, Rng& rng) {
  Tensor z({rows, cols});
  for (int64_t i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return z;
}

void check_loss(double value, const char* which, int64_t iter) {
  if (!std::isfinite(value) || std::abs(value) > kLossBlowup)
    throw NumericError(std::string("training diverged: ") + which +
                       " loss = " + std::to_string(value) + " at iteration " +
                       std::to_string(iter));
}

// Copies tape gradients for `params` into `buf`, flipping sign when
// ascending. Parameters the loss never touched get zero gradients.
void gather_grads(Tape& tape, const std::vector<Tensor*>& params,
                  std::vector<Tensor>& buf, bool negate) {
  for (size_t i = 0; i < params.size(); ++i) {
    if (buf[i].empty()) buf[i] = Tensor(params[i]->shape());
    const int id = tape.leaf(params[i], true);
    const Tensor& g = tape.grad(id);
    if (g.empty()) {
      buf[i].fill(0.0);
      continue;
    }
    if (negate)
      for (int64_t j = 0; j < g.size(); ++j) buf[i][j] = -g[j];
    else
      std::memcpy(buf[i].data(), g.data(),
                  static_cast<size_t>(g.size()) * sizeof(double));
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (iters < 1) throw ConfigError("iters must be >= 1");
  if (inner_iters < 1)
    throw ConfigError("inner_iters must be >= 1 (one map step per outer step)");
  if (noise_draws < 1) throw ConfigError("noise_draws must be >= 1");
  if (stochastic && noise_dim < 1)
    throw ConfigError("stochastic training needs noise_dim >= 1");
  if (!stochastic && noise_draws != 1)
    throw ConfigError("noise_draws > 1 requires stochastic = true");
  if (marginals.size() < 2)
    throw ConfigError("need at least two marginals, got " +
                      std::to_string(marginals.size()));
  double sum = 0.0;
  for (const MarginalConfig& mc : marginals) {
    if (!(mc.lambda > 0.0))
      throw ConfigError("marginal weights must be positive");
    if (!(mc.cost.alpha > 0.0))
      throw ConfigError("cost alpha must be positive");
    if (!(mc.div.tau > 0.0)) throw ConfigError("tau must be positive");
    sum += mc.lambda;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("marginal weights must sum to 1, got " +
                      std::to_string(sum));
}

TrainResult train(const TrainConfig& cfg,
                  const std::vector<BatchSampler>& samplers) {
  cfg.validate();
  const int64_t K = static_cast<int64_t>(cfg.marginals.size());
  if (static_cast<int64_t>(samplers.size()) != K)
    throw ConfigError("sampler count does not match marginal count");

  const auto t_start = std::chrono::steady_clock::now();

  std::vector<double> lambda;
  for (const MarginalConfig& mc : cfg.marginals) lambda.push_back(mc.lambda);

  Rng init_rng(cfg.seed, "init");
  TrainResult result{
      PotentialBank::create(cfg.dim, cfg.f_hidden, lambda, init_rng),
      MapBank::create(cfg.dim, cfg.t_hidden, K, cfg.stochastic, cfg.noise_dim,
                      init_rng),
      {}};
  PotentialBank& pot = result.pot;
  MapBank& maps = result.maps;

  std::vector<Tensor*> theta, omega;
  std::vector<std::string> theta_names, omega_names;
  for (int64_t k = 0; k < K; ++k) {
    pot.g[static_cast<size_t>(k)].collect_params("g" + std::to_string(k + 1),
                                                 theta, theta_names);
    maps.t[static_cast<size_t>(k)].collect_params("T" + std::to_string(k + 1),
                                                  omega, omega_names);
  }
  std::vector<Tensor*> m_param = {&pot.m};

  Adam opt_f({cfg.lr_f, cfg.beta1, cfg.beta2, 1e-8}, theta, theta_names);
  Adam opt_m({cfg.lr_m, cfg.beta1, cfg.beta2, 1e-8}, m_param, {"m"});
  Adam opt_t({cfg.lr_t, cfg.beta1, cfg.beta2, 1e-8}, omega, omega_names);

  std::vector<Tensor> theta_grads(theta.size()), omega_grads(omega.size()),
      m_grads(1);

  Rng batch_rng(cfg.seed, "batch");
  Rng noise_rng(cfg.seed, "noise");

  TrainReport& report = result.report;
  report.iters = cfg.iters;
  report.potential_loss.reserve(static_cast<size_t>(cfg.iters));
  report.m_trace.reserve(static_cast<size_t>(cfg.iters));
  report.map_loss.assign(static_cast<size_t>(K), {});

  const int64_t S = cfg.noise_draws;
  Tape tape;
  std::vector<Tensor> xs(static_cast<size_t>(K)), ys(static_cast<size_t>(K)),
      costs(static_cast<size_t>(K)), noises(static_cast<size_t>(K));

  for (int64_t iter = 0; iter < cfg.iters; ++iter) {
    // Potential ascent: maps are evaluated off-tape, potentials get the tape.
    for (int64_t k = 0; k < K; ++k) {
      const size_t uk = static_cast<size_t>(k);
      Tensor x = samplers[uk](cfg.batch, batch_rng);
      xs[uk] = repeat_rows(x, S);
      if (cfg.stochastic) {
        noises[uk] = draw_noise(cfg.batch * S, cfg.noise_dim, noise_rng);
        ys[uk] = maps.map_eval(k, xs[uk], noises[uk]);
      } else {
        ys[uk] = maps.map_eval(k, xs[uk]);
      }
      costs[uk] = Tensor({xs[uk].rows(), 1});
      cost_eval_rows(cfg.marginals[uk].cost, xs[uk], ys[uk], costs[uk]);
    }
    tape.reset();
    int total = -1;
    for (int64_t k = 0; k < K; ++k) {
      const size_t uk = static_cast<size_t>(k);
      const int y_leaf = tape.leaf(&ys[uk], false);
      const int c_leaf = tape.leaf(&costs[uk], false);
      const int f_node = pot.f_on_tape(tape, k, y_leaf, true);
      int u = tape.sub(f_node, c_leaf);
      if (S > 1) u = tape.mean_groups(u, S);
      const int conj_node = tape.div_conj(u, cfg.marginals[uk].div);
      const int term =
          tape.scale(tape.mean_all(conj_node), -cfg.marginals[uk].lambda);
      total = total < 0 ? term : tape.add(total, term);
    }
    total = tape.add_scalar(total, tape.leaf(&pot.m, true), 1.0);
    const double pot_loss = tape.value(total)[0];
    check_loss(pot_loss, "potential", iter);
    tape.backward(total);
    gather_grads(tape, theta, theta_grads, /*negate=*/true);
    gather_grads(tape, m_param, m_grads, /*negate=*/true);
    clip_global_norm(theta_grads, cfg.clip_norm);
    clip_global_norm(m_grads, cfg.clip_norm);
    opt_f.step(theta_grads);
    opt_m.step(m_grads);
    report.potential_loss.push_back(pot_loss);
    report.m_trace.push_back(pot.m[0]);

    // Map descent against the frozen potentials.
    std::vector<double> inner_mean(static_cast<size_t>(K), 0.0);
    for (int64_t inner = 0; inner < cfg.inner_iters; ++inner) {
      for (int64_t k = 0; k < K; ++k) {
        const size_t uk = static_cast<size_t>(k);
        Tensor x = samplers[uk](cfg.batch, batch_rng);
        xs[uk] = repeat_rows(x, S);
        if (cfg.stochastic)
          noises[uk] = draw_noise(cfg.batch * S, cfg.noise_dim, noise_rng);
      }
      tape.reset();
      total = -1;
      for (int64_t k = 0; k < K; ++k) {
        const size_t uk = static_cast<size_t>(k);
        const int x_leaf = tape.leaf(&xs[uk], false);
        int input = x_leaf;
        if (cfg.stochastic) {
          const int z_leaf = tape.leaf(&noises[uk], false);
          input = tape.concat_cols(x_leaf, z_leaf);
        }
        const int y = maps.t[uk].on_tape(tape, input, true);
        const int c = tape.pair_cost(y, &xs[uk], cfg.marginals[uk].cost);
        const int f_node = pot.f_on_tape(tape, k, y, false);
        const int lk = tape.mean_all(tape.sub(c, f_node));
        const double lk_val = tape.value(lk)[0];
        check_loss(lk_val, "map", iter);
        inner_mean[uk] += lk_val;
        total = total < 0 ? lk : tape.add(total, lk);
      }
      tape.backward(total);
      gather_grads(tape, omega, omega_grads, /*negate=*/false);
      clip_global_norm(omega_grads, cfg.clip_norm);
      opt_t.step(omega_grads);
    }
    for (int64_t k = 0; k < K; ++k)
      report.map_loss[static_cast<size_t>(k)].push_back(
          inner_mean[static_cast<size_t>(k)] /
          static_cast<double>(cfg.inner_iters));
  }

  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return result;
}

}  // namespace unotb
