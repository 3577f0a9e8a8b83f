#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unotb/datagen.hpp"
#include "unotb/trainer.hpp"

namespace unotb {

// One experiment = one config file = one output directory. Subcommands
// share the config and communicate through files, so each can be re-run in
// isolation and reproduces its artifacts byte for byte (timing lives in a
// separate file for that reason).
struct MarginalRun {
  DatasetSpec data;      // per-marginal seed is derived from the run seed
  MarginalConfig train;  // weight, divergence, cost
};

struct RunConfig {
  std::string out_dir;
  uint64_t seed = 0;
  TrainConfig train;
  std::vector<MarginalRun> marginals;
  int64_t eval_n = 2000;
  int64_t oracle_n = 2000;
  double oracle_eps_scale = 0.0;  // 0 = solver default
  double oracle_tol = 0.0;        // 0 = solver default
  // The cloud-vs-cloud W2 metric gets a coarser regularization than the
  // reference solve: between near-identical multimodal clouds the plan is
  // nearly degenerate and small-eps Sinkhorn mixes too slowly to be worth
  // the accuracy, while the entropic bias only inflates the reported value.
  double w2_eps_scale = 1e-2;
  double w2_tol = 1e-4;
  int64_t sampler_pool = 4096;
  std::string config_hash;
  std::string canonical;

  static RunConfig load(const std::string& path);
  // Resolved dataset for marginal k (cached nowhere; generators are cheap).
  Dataset marginal_data(int64_t k) const;
};

void run_generate(const RunConfig& cfg, bool header);
void run_train(const RunConfig& cfg);
void run_eval(const RunConfig& cfg);
void run_oracle(const RunConfig& cfg);
void run_metrics(const RunConfig& cfg);
void run_plot(const RunConfig& cfg);

}  // namespace unotb
