#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "unotb/error.hpp"
#include "unotb/pipeline.hpp"

using namespace unotb;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / "unotb_pipeline_test" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const fs::path& dir, const std::string& body) {
  const fs::path path = dir / "run.conf";
  std::ofstream out(path);
  out << "out_dir = " << (dir / "out").string() << "\n" << body;
  return path.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

const std::string kTinyRun =
    "seed = 11\n"
    "dim = 2\n"
    "batch = 32\n"
    "iters = 30\n"
    "n_t = 2\n"
    "f_hidden = 8\n"
    "t_hidden = 8\n"
    "eval_n = 50\n"
    "oracle_n = 30\n"
    "pool = 128\n"
    "k.1.dataset = spiral\n"
    "k.1.n = 200\n"
    "k.1.lambda = 0.5\n"
    "k.2.dataset = gm8\n"
    "k.2.n = 200\n"
    "k.2.lambda = 0.5\n"
    "k.2.divergence = kl\n"
    "k.2.tau = 5\n";

}  // namespace

TEST_CASE("config loading resolves marginals and derives per-marginal seeds") {
  const auto dir = fresh_dir("load");
  const RunConfig cfg = RunConfig::load(write_config(dir, kTinyRun));
  CHECK(cfg.seed == 11);
  CHECK(cfg.train.iters == 30);
  CHECK(cfg.train.inner_iters == 2);
  REQUIRE(cfg.marginals.size() == 2);
  CHECK(cfg.marginals[0].data.name == "spiral");
  CHECK(cfg.marginals[1].train.div.kind == DivKind::kKl);
  CHECK(cfg.marginals[1].train.div.tau == 5.0);
  CHECK(cfg.marginals[0].data.seed != cfg.marginals[1].data.seed);
  CHECK(cfg.train.marginals.size() == 2);
  CHECK_FALSE(cfg.config_hash.empty());

  const Dataset d = cfg.marginal_data(0);
  CHECK(d.points.rows() == 200);
  CHECK(d.points.cols() == 2);
}

TEST_CASE("config validation failures name the offending key") {
  const auto dir = fresh_dir("invalid");
  const auto load = [&](const std::string& body) {
    return RunConfig::load(write_config(dir, body));
  };
  CHECK_THROWS_WITH_AS((void)load("seed = 1\nn_t = 0\nk.1.dataset = gm8\n"
                                  "k.1.lambda = 1\n"),
                       "N_T must be >= 1", ConfigError);
  // No marginals at all.
  CHECK_THROWS_AS((void)load("seed = 1\n"), ConfigError);
  // Unknown dataset name.
  CHECK_THROWS_AS((void)load("k.1.dataset = blobs\nk.1.lambda = 1\n"),
                  ConfigError);
  // Weights have to sum to one.
  CHECK_THROWS_AS((void)load("k.1.dataset = gm8\nk.1.lambda = 0.3\n"
                             "k.2.dataset = gm8\nk.2.lambda = 0.3\n"),
                  ConfigError);
  // Typos anywhere are fatal.
  CHECK_THROWS_AS((void)load("k.1.dataset = gm8\nk.1.lambda = 1\nitersx = 2\n"),
                  ConfigError);
  // Gaussian marginals need their moments spelled out.
  CHECK_THROWS_AS((void)load("k.1.dataset = gaussian\nk.1.lambda = 1\n"),
                  ConfigError);
}

TEST_CASE("generate writes identical bytes on repeat runs") {
  const auto dir = fresh_dir("generate");
  const RunConfig cfg = RunConfig::load(write_config(dir, kTinyRun));
  run_generate(cfg, /*header=*/false);
  const std::string first_data = slurp(dir / "out" / "data_k1.csv");
  const std::string first_manifest = slurp(dir / "out" / "manifest_generate.json");
  REQUIRE_FALSE(first_data.empty());
  run_generate(cfg, false);
  CHECK(slurp(dir / "out" / "data_k1.csv") == first_data);
  CHECK(slurp(dir / "out" / "data_k2.csv") ==
        slurp(dir / "out" / "data_k2.csv"));
  CHECK(slurp(dir / "out" / "manifest_generate.json") == first_manifest);

  // The header flag only prepends one line.
  run_generate(cfg, true);
  const std::string with_header = slurp(dir / "out" / "data_k1.csv");
  CHECK(with_header == "x1,x2\n" + first_data);
}

TEST_CASE("train, eval, oracle and metrics chain together at toy scale") {
  const auto dir = fresh_dir("chain");
  const RunConfig cfg = RunConfig::load(write_config(dir, kTinyRun));
  run_train(cfg);
  CHECK(fs::exists(dir / "out" / "checkpoint.bin"));

  const std::string report = slurp(dir / "out" / "report.json");
  const auto rj = nlohmann::json::parse(report);
  CHECK(rj.at("potential_loss").size() == 30);
  CHECK(rj.at("m_trajectory").size() == 30);
  // Timing is the one artifact allowed to differ between identical runs.
  CHECK(report.find("wall_time") == std::string::npos);
  CHECK(slurp(dir / "out" / "timing.json").find("wall_time_sec") !=
        std::string::npos);

  run_eval(cfg);
  const auto aj = nlohmann::json::parse(slurp(dir / "out" / "acceptance.json"));
  CHECK(aj.at("k1").at("acceptance_rate").get<double>() == 1.0);  // balanced
  CHECK(aj.at("k2").at("acceptance_rate").get<double>() <= 1.0);
  CHECK(aj.at("k2").at("classes").size() == 8);

  run_oracle(cfg);
  const auto oj = nlohmann::json::parse(slurp(dir / "out" / "oracle.json"));
  CHECK(oj.at("kind") == "discrete");

  run_metrics(cfg);
  const auto mj = nlohmann::json::parse(slurp(dir / "out" / "metrics.json"));
  REQUIRE(mj.size() == 2);
  CHECK(mj[0].at("metric") == "L2");
  CHECK(mj[1].at("metric") == "W2");
  CHECK(mj[0].at("value").get<double>() >= 0.0);

  run_plot(cfg);
  CHECK(fs::exists(dir / "out" / "plot.svg"));
  CHECK(fs::exists(dir / "out" / "plot_data.csv"));
}

TEST_CASE("train twice gives byte-identical reports and checkpoints") {
  const auto dir = fresh_dir("repeat");
  const RunConfig cfg = RunConfig::load(write_config(dir, kTinyRun));
  run_train(cfg);
  const std::string report = slurp(dir / "out" / "report.json");
  const std::string ckpt = slurp(dir / "out" / "checkpoint.bin");
  run_train(cfg);
  CHECK(slurp(dir / "out" / "report.json") == report);
  CHECK(slurp(dir / "out" / "checkpoint.bin") == ckpt);
}

TEST_CASE("gaussian runs route to the closed-form reference") {
  const auto dir = fresh_dir("gauss");
  const std::string body =
      "seed = 3\n"
      "dim = 2\n"
      "batch = 32\n"
      "iters = 25\n"
      "f_hidden = 8\n"
      "t_hidden = 8\n"
      "eval_n = 60\n"
      "pool = 128\n"
      "k.1.dataset = gaussian\n"
      "k.1.n = 300\n"
      "k.1.lambda = 0.5\n"
      "k.1.divergence = kl\n"
      "k.1.tau = 100\n"
      "k.1.mean = 0, 0\n"
      "k.1.cov = 1, 0; 0, 1\n"
      "k.2.dataset = gaussian\n"
      "k.2.n = 300\n"
      "k.2.lambda = 0.5\n"
      "k.2.divergence = kl\n"
      "k.2.tau = 100\n"
      "k.2.mean = 2, 0\n"
      "k.2.cov = 2, 0.5; 0.5, 1\n";
  const RunConfig cfg = RunConfig::load(write_config(dir, body));
  run_train(cfg);
  run_oracle(cfg);
  const auto oj = nlohmann::json::parse(slurp(dir / "out" / "oracle.json"));
  CHECK(oj.at("kind") == "gaussian");
  CHECK(oj.at("mean").size() == 2);
  CHECK(oj.at("cov").size() == 4);
  CHECK(fs::exists(dir / "out" / "oracle_tstar_k2.csv"));

  run_metrics(cfg);
  const auto mj = nlohmann::json::parse(slurp(dir / "out" / "metrics.json"));
  REQUIRE(mj.size() == 2);
  CHECK(mj[0].at("metric") == "L2_UVP");
  CHECK(mj[1].at("metric") == "BW2_UVP");
}

TEST_CASE("the discrete reference refuses shapes it cannot certify") {
  const auto dir = fresh_dir("refuse");
  // Three marginals: no pairwise reduction.
  const std::string three =
      "seed = 1\nbatch = 16\niters = 5\nf_hidden = 8\nt_hidden = 8\n"
      "k.1.dataset = gm8\nk.1.lambda = 0.4\n"
      "k.2.dataset = gm8\nk.2.lambda = 0.3\n"
      "k.3.dataset = gm8\nk.3.lambda = 0.3\nk.3.divergence = kl\n";
  CHECK_THROWS_AS(run_oracle(RunConfig::load(write_config(dir, three))),
                  ConfigError);
  // Relaxed first marginal: the exact side of the reduction is gone.
  const std::string relaxed1 =
      "seed = 1\nbatch = 16\niters = 5\nf_hidden = 8\nt_hidden = 8\n"
      "k.1.dataset = spiral\nk.1.lambda = 0.5\nk.1.divergence = kl\n"
      "k.2.dataset = gm8\nk.2.lambda = 0.5\n";
  CHECK_THROWS_AS(run_oracle(RunConfig::load(write_config(dir, relaxed1))),
                  ConfigError);
}
