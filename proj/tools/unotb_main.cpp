// Command-line front end. Each subcommand reads one config file and works
// inside its out_dir; see README for the file formats involved.
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "unotb/error.hpp"
#include "unotb/pipeline.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericExit = 3;
constexpr int kIoExit = 4;

int run(int argc, char** argv) {
  CLI::App app{"semi-unbalanced barycenter estimation"};
  app.require_subcommand(1);

  std::string config_path;
  bool header = false;

  CLI::App* generate =
      app.add_subcommand("generate", "materialize the input datasets");
  generate->add_option("config", config_path, "config file")->required();
  generate->add_flag("--header", header, "write column names into the CSVs");

  CLI::App* train_cmd =
      app.add_subcommand("train", "fit potentials and maps, write checkpoint");
  train_cmd->add_option("config", config_path, "config file")->required();

  CLI::App* eval =
      app.add_subcommand("eval", "rejection-sample the barycenter estimate");
  eval->add_option("config", config_path, "config file")->required();

  CLI::App* oracle =
      app.add_subcommand("oracle", "compute the reference barycenter");
  oracle->add_option("config", config_path, "config file")->required();

  CLI::App* metrics =
      app.add_subcommand("metrics", "score the trained maps against the reference");
  metrics->add_option("config", config_path, "config file")->required();

  CLI::App* plot = app.add_subcommand("plot", "render run artifacts to SVG");
  plot->add_option("config", config_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  const unotb::RunConfig cfg = unotb::RunConfig::load(config_path);
  if (generate->parsed()) unotb::run_generate(cfg, header);
  if (train_cmd->parsed()) unotb::run_train(cfg);
  if (eval->parsed()) unotb::run_eval(cfg);
  if (oracle->parsed()) unotb::run_oracle(cfg);
  if (metrics->parsed()) unotb::run_metrics(cfg);
  if (plot->parsed()) unotb::run_plot(cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const unotb::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigExit;
  } catch (const unotb::NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumericExit;
  } catch (const unotb::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIoExit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
