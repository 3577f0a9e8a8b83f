#include "unotb/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include <json.hpp>

#include "unotb/checkpoint.hpp"
#include "unotb/config.hpp"
#include "unotb/csv.hpp"
#include "unotb/discrete_ot.hpp"
#include "unotb/error.hpp"
#include "unotb/gaussian.hpp"
#include "unotb/metrics.hpp"
#include "unotb/sampler.hpp"
#include "unotb/svg.hpp"

#ifndef UNOTB_SOURCE_HASH
#define UNOTB_SOURCE_HASH "unknown"
#endif

namespace unotb {

namespace {

using nlohmann::json;

const std::vector<std::string> kKnownDatasets = {
    "spiral",      "moons",      "gm8",        "imbalance_p1", "imbalance_p2",
    "outlier_p1",  "outlier_p2", "outlier_p3", "gaussian"};

std::string kpath(const RunConfig& cfg, const std::string& name) {
  return cfg.out_dir + "/" + name;
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec)
    throw IoError("cannot create output directory '" + cfg.out_dir +
                  "': " + ec.message());
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("short write to '" + path + "'");
}

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoError("cannot parse '" + path + "': " + e.what());
  }
  return j;
}

void write_manifest(const RunConfig& cfg, const std::string& subcommand) {
  json m;
  m["subcommand"] = subcommand;
  m["seed"] = cfg.seed;
  m["config_hash"] = cfg.config_hash;
  m["source_hash"] = UNOTB_SOURCE_HASH;
  m["config"] = cfg.canonical;
  write_json(kpath(cfg, "manifest_" + subcommand + ".json"), m);
}

Tensor tensor_from_list(const std::vector<double>& flat, int64_t rows,
                        int64_t cols, const std::string& key) {
  if (int64_t(flat.size()) != rows * cols)
    throw ConfigError("key '" + key + "': expected " +
                      std::to_string(rows * cols) + " numbers, got " +
                      std::to_string(flat.size()));
  Tensor t({rows, cols});
  std::copy(flat.begin(), flat.end(), t.data());
  return t;
}

// Uniform-with-replacement draws from a fixed cloud.
BatchSampler cloud_sampler(std::shared_ptr<const Dataset> data) {
  return [data](int64_t n, Rng& rng) {
    const Tensor& pts = data->points;
    Tensor x({n, pts.cols()});
    for (int64_t i = 0; i < n; ++i) {
      const auto row = pts.row_span(int64_t(rng.below(uint64_t(pts.rows()))));
      std::copy(row.begin(), row.end(), x.data() + i * pts.cols());
    }
    return x;
  };
}

// Banks shaped exactly as training would create them, for checkpoint loads.
std::pair<PotentialBank, MapBank> empty_banks(const RunConfig& cfg) {
  std::vector<double> lambda;
  for (const MarginalRun& m : cfg.marginals) lambda.push_back(m.train.lambda);
  Rng rng(cfg.seed, "init");
  PotentialBank pot =
      PotentialBank::create(cfg.train.dim, cfg.train.f_hidden, lambda, rng);
  MapBank maps =
      MapBank::create(cfg.train.dim, cfg.train.t_hidden,
                      int64_t(cfg.marginals.size()), cfg.train.stochastic,
                      cfg.train.noise_dim, rng);
  return {std::move(pot), std::move(maps)};
}

std::pair<PotentialBank, MapBank> load_trained(const RunConfig& cfg) {
  auto banks = empty_banks(cfg);
  load_banks(kpath(cfg, "checkpoint.bin"), banks.first, banks.second);
  return banks;
}

// Map estimate on given inputs; stochastic maps are averaged over
// noise_draws seeded draws so the result stays reproducible.
Tensor map_estimate(const RunConfig& cfg, const MapBank& maps, int64_t k,
                    const Tensor& x, const char* tag) {
  if (!maps.stochastic) return maps.map_eval(k, x);
  Rng rng(cfg.seed, tag);
  Tensor acc = Tensor::zeros({x.rows(), x.cols()});
  for (int64_t s = 0; s < cfg.train.noise_draws; ++s) {
    Tensor z({x.rows(), maps.noise_dim});
    for (int64_t i = 0; i < z.size(); ++i) z[i] = rng.normal();
    const Tensor y = maps.map_eval(k, x, z);
    for (int64_t i = 0; i < acc.size(); ++i) acc[i] += y[i];
  }
  const double inv = 1.0 / double(cfg.train.noise_draws);
  for (int64_t i = 0; i < acc.size(); ++i) acc[i] *= inv;
  return acc;
}

SinkhornOptions oracle_options(const RunConfig& cfg) {
  SinkhornOptions opts;
  if (cfg.oracle_eps_scale > 0.0) opts.eps_scale = cfg.oracle_eps_scale;
  if (cfg.oracle_tol > 0.0) opts.tol = cfg.oracle_tol;
  return opts;
}

bool gaussian_run(const RunConfig& cfg) {
  for (const MarginalRun& m : cfg.marginals)
    if (m.data.name != "gaussian") return false;
  return true;
}

Gaussian marginal_gaussian(const RunConfig& cfg, int64_t k) {
  const DatasetSpec& d = cfg.marginals[size_t(k)].data;
  return make_gaussian(d.mean, d.cov);
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  ConfigMap map = ConfigMap::parse_file(path);
  RunConfig cfg;
  cfg.out_dir = map.get_string("out_dir");
  cfg.seed = uint64_t(map.get_int("seed", 0));

  TrainConfig& tc = cfg.train;
  tc.seed = cfg.seed;
  tc.dim = map.get_int("dim", 2);
  tc.batch = map.get_int("batch", 1024);
  tc.iters = map.get_int("iters", 10000);
  tc.inner_iters = map.get_int("n_t", 3);
  tc.lr_f = map.get_double("lr_f", 1e-3);
  tc.lr_t = map.get_double("lr_t", 1e-3);
  tc.lr_m = map.get_double("lr_m", 1e-3);
  tc.beta1 = map.get_double("beta1", 0.0);
  tc.beta2 = map.get_double("beta2", 0.9);
  tc.clip_norm = map.get_double("clip_norm", 100.0);
  tc.stochastic = map.get_bool("stochastic", false);
  tc.noise_dim = map.get_int("noise_dim", 0);
  tc.noise_draws = map.get_int("noise_draws", 1);
  tc.f_hidden = map.get_int_list("f_hidden", {128, 128, 128});
  tc.t_hidden = map.get_int_list("t_hidden", {128, 128, 128});
  if (tc.inner_iters < 1) throw ConfigError("N_T must be >= 1");

  cfg.eval_n = map.get_int("eval_n", 2000);
  cfg.oracle_n = map.get_int("oracle_n", 2000);
  cfg.oracle_eps_scale = map.get_double("oracle_eps_scale", 0.0);
  cfg.oracle_tol = map.get_double("oracle_tol", 0.0);
  cfg.w2_eps_scale = map.get_double("w2_eps_scale", 1e-2);
  cfg.w2_tol = map.get_double("w2_tol", 1e-4);
  cfg.sampler_pool = map.get_int("pool", 4096);

  for (int64_t k = 1;; ++k) {
    const std::string p = "k." + std::to_string(k) + ".";
    if (!map.has(p + "dataset")) break;
    MarginalRun m;
    m.data.name = map.get_string(p + "dataset");
    if (std::find(kKnownDatasets.begin(), kKnownDatasets.end(), m.data.name) ==
        kKnownDatasets.end())
      throw ConfigError("key '" + p + "dataset': unknown dataset '" +
                        m.data.name + "'");
    m.data.n = map.get_int(p + "n", 10000);
    m.data.seed = Rng::mix(cfg.seed, "data-k" + std::to_string(k));
    if (m.data.name == "gaussian") {
      const std::vector<double> mv = map.get_double_list(p + "mean");
      if (int64_t(mv.size()) != tc.dim)
        throw ConfigError("key '" + p + "mean': expected " +
                          std::to_string(tc.dim) + " numbers, got " +
                          std::to_string(mv.size()));
      m.data.mean = Tensor({tc.dim});
      std::copy(mv.begin(), mv.end(), m.data.mean.data());
      m.data.cov = tensor_from_list(map.get_double_list(p + "cov"), tc.dim,
                                    tc.dim, p + "cov");
    }
    m.train.lambda = map.get_double(p + "lambda");
    m.train.div = make_divergence(map.get_string(p + "divergence", "balanced"),
                                  map.get_double(p + "tau", 1.0));
    m.train.cost = make_cost(map.get_double(p + "alpha", 1.0));
    cfg.marginals.push_back(std::move(m));
    tc.marginals.push_back(cfg.marginals.back().train);
  }
  if (cfg.marginals.empty())
    throw ConfigError("no marginals configured (expected k.1.dataset, ...)");

  map.require_all_consumed();
  tc.validate();
  if (cfg.eval_n < 1 || cfg.oracle_n < 1)
    throw ConfigError("eval_n and oracle_n must be >= 1");

  cfg.config_hash = map.hash();
  cfg.canonical = map.canonical();
  return cfg;
}

Dataset RunConfig::marginal_data(int64_t k) const {
  return generate(marginals[size_t(k)].data);
}

void run_generate(const RunConfig& cfg, bool header) {
  ensure_out_dir(cfg);
  for (size_t k = 0; k < cfg.marginals.size(); ++k) {
    const Dataset d = cfg.marginal_data(int64_t(k));
    std::vector<std::string> head;
    if (header)
      for (int64_t c = 0; c < d.points.cols(); ++c)
        head.push_back("x" + std::to_string(c + 1));
    const std::string tag = "k" + std::to_string(k + 1);
    write_csv(kpath(cfg, "data_" + tag + ".csv"), d.points, head);
    write_labels(kpath(cfg, "labels_" + tag + ".csv"), d.labels);
  }
  write_manifest(cfg, "generate");
}

void run_train(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  std::vector<BatchSampler> samplers;
  for (size_t k = 0; k < cfg.marginals.size(); ++k)
    samplers.push_back(cloud_sampler(
        std::make_shared<const Dataset>(cfg.marginal_data(int64_t(k)))));

  const TrainResult result = train(cfg.train, samplers);
  save_checkpoint(kpath(cfg, "checkpoint.bin"),
                  bank_tensors(result.pot, result.maps));

  json report;
  report["potential_loss"] = result.report.potential_loss;
  report["map_loss"] = result.report.map_loss;
  report["m_trajectory"] = result.report.m_trace;
  report["iters"] = result.report.iters;
  write_json(kpath(cfg, "report.json"), report);

  json timing;  // kept apart so repeated runs produce identical artifacts
  timing["wall_time_sec"] = result.report.wall_time_sec;
  write_json(kpath(cfg, "timing.json"), timing);
  write_manifest(cfg, "train");
}

void run_eval(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const auto [pot, maps] = load_trained(cfg);
  SamplerConfig scfg;
  scfg.pool = cfg.sampler_pool;
  scfg.noise_draws = cfg.train.noise_draws;

  json acceptance;
  for (size_t k = 0; k < cfg.marginals.size(); ++k) {
    const std::string tag = "k" + std::to_string(k + 1);
    const auto data =
        std::make_shared<const Dataset>(cfg.marginal_data(int64_t(k)));

    // Raw density-ratio weights over the whole cloud, grouped by label.
    Rng weight_noise(cfg.seed, "eval-weights-" + tag);
    const AcceptanceWeights w =
        acceptance_weights(pot, maps, cfg.marginals[k].train, int64_t(k),
                           data->points, scfg, &weight_noise);
    std::vector<double> wv(w.weights.data(),
                           w.weights.data() + w.weights.size());
    const ClassAcceptance stats = acceptance_stats(wv, data->labels);
    json jk;
    jk["c_rej"] = w.c_rej;
    jk["classes"] = stats.classes;
    jk["mean_rate"] = stats.mean_rate;
    jk["composition"] = stats.composition;

    // Thinned barycenter sample through the trained map.
    const RejectionResult res = rejection_sample(
        pot, maps, cfg.marginals[k].train, int64_t(k), cloud_sampler(data),
        cfg.eval_n, Rng::mix(cfg.seed, "eval-" + tag), scfg);
    write_csv(kpath(cfg, "accepted_" + tag + ".csv"), res.accepted);
    write_csv(kpath(cfg, "bary_" + tag + ".csv"), res.samples);
    jk["acceptance_rate"] = res.acceptance_rate;
    jk["candidates"] = res.candidates;
    acceptance[tag] = std::move(jk);
  }
  write_json(kpath(cfg, "acceptance.json"), acceptance);
  write_manifest(cfg, "eval");
}

void run_oracle(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  json info;
  if (gaussian_run(cfg)) {
    info["kind"] = "gaussian";
    std::vector<Gaussian> gs;
    std::vector<double> lambda;
    for (size_t k = 0; k < cfg.marginals.size(); ++k) {
      gs.push_back(marginal_gaussian(cfg, int64_t(k)));
      lambda.push_back(cfg.marginals[k].train.lambda);
    }
    const GaussianBarycenter bary = gaussian_barycenter(gs, lambda);
    info["iterations"] = bary.iterations;
    info["residual"] = bary.residual;
    info["mean"] = std::vector<double>(
        bary.bary.mean.data(), bary.bary.mean.data() + bary.bary.mean.size());
    info["cov"] = std::vector<double>(
        bary.bary.cov.data(), bary.bary.cov.data() + bary.bary.cov.size());

    for (size_t k = 0; k < cfg.marginals.size(); ++k) {
      const std::string tag = "k" + std::to_string(k + 1);
      DatasetSpec in_spec = cfg.marginals[k].data;
      in_spec.n = cfg.eval_n;
      in_spec.seed = Rng::mix(cfg.seed, "oracle-in-" + tag);
      const Dataset inputs = generate(in_spec);
      const LinearMap t_star = gaussian_monge_map(gs[k], bary.bary);
      write_csv(kpath(cfg, "oracle_inputs_" + tag + ".csv"), inputs.points);
      write_csv(kpath(cfg, "oracle_tstar_" + tag + ".csv"),
                apply_linear_map(t_star, inputs.points));
    }
    DatasetSpec bary_spec;
    bary_spec.name = "gaussian";
    bary_spec.n = cfg.eval_n;
    bary_spec.seed = Rng::mix(cfg.seed, "oracle-bary");
    bary_spec.mean = bary.bary.mean;
    bary_spec.cov = bary.bary.cov;
    write_csv(kpath(cfg, "oracle_bary.csv"), generate(bary_spec).points);
  } else {
    if (cfg.marginals.size() != 2)
      throw ConfigError(
          "the discrete reference solver supports exactly two marginals; got " +
          std::to_string(cfg.marginals.size()));
    if (cfg.marginals[0].train.div.kind != DivKind::kBalanced)
      throw ConfigError(
          "the discrete reference solver keeps marginal 1 exact; set "
          "k.1.divergence = balanced");
    if (cfg.marginals[1].train.div.kind != DivKind::kKl &&
        cfg.marginals[1].train.div.kind != DivKind::kBalanced)
      throw ConfigError(
          "the discrete reference solver relaxes marginal 2 with kl (or "
          "balanced)");
    info["kind"] = "discrete";
    DatasetSpec s1 = cfg.marginals[0].data, s2 = cfg.marginals[1].data;
    s1.n = s2.n = cfg.oracle_n;
    s1.seed = Rng::mix(cfg.seed, "oracle-in-k1");
    s2.seed = Rng::mix(cfg.seed, "oracle-in-k2");
    const Tensor x1 = generate(s1).points;
    const Tensor x2 = generate(s2).points;
    const double alpha = cfg.marginals[0].train.cost.alpha;
    if (std::abs(alpha - cfg.marginals[1].train.cost.alpha) > 1e-12)
      throw ConfigError(
          "the discrete reference solver needs one shared cost alpha");
    // A very large tau turns the relaxed side effectively balanced; a shared
    // alpha folds into the relaxation strength without changing the plan.
    const bool bal2 = cfg.marginals[1].train.div.kind == DivKind::kBalanced;
    const double tau =
        (bal2 ? 1e9 : cfg.marginals[1].train.div.tau) / alpha;
    const double l1 = cfg.marginals[0].train.lambda;
    const BarycenterOracle oracle = interpolated_barycenter_oracle(
        x1, x2, l1, cfg.marginals[1].train.lambda, tau, oracle_options(cfg));
    write_csv(kpath(cfg, "oracle_inputs_k1.csv"), x1);
    write_csv(kpath(cfg, "oracle_tstar_k1.csv"), oracle.t_star);
    write_csv(kpath(cfg, "oracle_bary.csv"), oracle.t_star);
    info["eps"] = oracle.plan.eps;
    info["iterations"] = oracle.plan.iterations;
    info["objective"] = oracle.plan.objective;
  }
  write_json(kpath(cfg, "oracle.json"), info);
  write_manifest(cfg, "oracle");
}

void run_metrics(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const json info = read_json(kpath(cfg, "oracle.json"));
  const auto [pot, maps] = load_trained(cfg);
  json out = json::array();
  const auto push = [&](const std::string& name, double value, int64_t n) {
    json r;
    r["metric"] = name;
    r["value"] = value;
    r["n"] = n;
    r["seed"] = cfg.seed;
    r["config_hash"] = cfg.config_hash;
    out.push_back(std::move(r));
  };

  if (info.at("kind") == "discrete") {
    const Tensor x1 = read_csv(kpath(cfg, "oracle_inputs_k1.csv"));
    const Tensor t_star = read_csv(kpath(cfg, "oracle_tstar_k1.csv"));
    const Tensor t_hat = map_estimate(cfg, maps, 0, x1, "metrics-noise-k1");
    push("L2", l2_map_metric(t_hat, t_star), x1.rows());
    const Tensor bary = read_csv(kpath(cfg, "oracle_bary.csv"));
    SinkhornOptions w2_opts;
    w2_opts.eps_scale = cfg.w2_eps_scale;
    w2_opts.tol = cfg.w2_tol;
    push("W2", w2_squared(t_hat, bary, w2_opts), x1.rows());
  } else {
    const Tensor reference = read_csv(kpath(cfg, "oracle_bary.csv"));
    std::vector<Tensor> hats, stars;
    std::vector<double> lambda;
    int64_t pooled_rows = 0;
    for (size_t k = 0; k < cfg.marginals.size(); ++k) {
      const std::string tag = "k" + std::to_string(k + 1);
      const Tensor inputs = read_csv(kpath(cfg, "oracle_inputs_" + tag + ".csv"));
      stars.push_back(read_csv(kpath(cfg, "oracle_tstar_" + tag + ".csv")));
      hats.push_back(map_estimate(cfg, maps, int64_t(k), inputs,
                                  ("metrics-noise-" + tag).c_str()));
      lambda.push_back(cfg.marginals[k].train.lambda);
      pooled_rows += hats.back().rows();
    }
    push("L2_UVP", l2_uvp_weighted(hats, stars, lambda, reference),
         reference.rows());

    Tensor pooled({pooled_rows, cfg.train.dim});
    int64_t at = 0;
    for (const Tensor& h : hats) {
      std::copy(h.data(), h.data() + h.size(), pooled.data() + at);
      at += h.size();
    }
    const std::vector<double> mean_v = info.at("mean").get<std::vector<double>>();
    const std::vector<double> cov_v = info.at("cov").get<std::vector<double>>();
    Tensor mean({cfg.train.dim});
    std::copy(mean_v.begin(), mean_v.end(), mean.data());
    const Gaussian exact = make_gaussian(
        std::move(mean),
        tensor_from_list(cov_v, cfg.train.dim, cfg.train.dim, "oracle cov"));
    push("BW2_UVP", bw2_uvp(pooled, exact), pooled_rows);
  }
  write_json(kpath(cfg, "metrics.json"), out);
  write_manifest(cfg, "metrics");
}

void run_plot(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const std::vector<std::string> palette = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                            "#d62728", "#9467bd", "#8c564b"};
  std::vector<ScatterLayer> layers;
  size_t color = 0;
  const auto maybe_layer = [&](const std::string& file, const std::string& name,
                               double radius) {
    const std::string path = kpath(cfg, file);
    if (!std::filesystem::exists(path)) return;
    ScatterLayer l;
    l.name = name;
    l.points = read_csv(path);
    l.color = palette[color++ % palette.size()];
    l.radius = radius;
    layers.push_back(std::move(l));
  };
  for (size_t k = 0; k < cfg.marginals.size(); ++k) {
    const std::string tag = "k" + std::to_string(k + 1);
    maybe_layer("data_" + tag + ".csv", "input " + tag, 1.5);
  }
  for (size_t k = 0; k < cfg.marginals.size(); ++k) {
    const std::string tag = "k" + std::to_string(k + 1);
    maybe_layer("accepted_" + tag + ".csv", "accepted " + tag, 1.5);
    maybe_layer("bary_" + tag + ".csv", "barycenter " + tag, 1.5);
  }
  maybe_layer("oracle_bary.csv", "reference", 1.5);
  if (layers.empty())
    throw IoError("nothing to plot in '" + cfg.out_dir +
                  "' (run generate/eval/oracle first)");

  int64_t rows = 0;
  for (const ScatterLayer& l : layers) rows += l.points.rows();
  Tensor series({rows, 3});  // layer index, x, y
  int64_t at = 0;
  for (size_t li = 0; li < layers.size(); ++li)
    for (int64_t i = 0; i < layers[li].points.rows(); ++i) {
      series.at(at, 0) = double(li);
      series.at(at, 1) = layers[li].points.at(i, 0);
      series.at(at, 2) = layers[li].points.at(i, 1);
      ++at;
    }
  write_csv(kpath(cfg, "plot_data.csv"), series);
  write_scatter_svg(kpath(cfg, "plot.svg"), layers);
  write_manifest(cfg, "plot");
}

}  // namespace unotb
