// Experiment runner: reproducible epsilon-ladder studies of vortex
// concentration, deformation identities and spectral inequalities on flat
// tori. See README.md for the configuration schema.

#include <CLI11.hpp>

#include <iostream>

#include "ivlab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ivlab - vortex concentration and domain-deformation laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  int threads = 0;
  std::uint64_t seed_override = 0;
  bool seed_set = false;

  CLI::App* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path, "path to the configuration file")->required();
  run->add_option("--out", out_override, "override the output directory");
  run->add_option("--threads", threads, "cap kernel data-parallelism");
  run->add_option("--seed", seed_override, "override the config seed")
      ->each([&](const std::string&) { seed_set = true; });

  CLI::App* list = app.add_subcommand("list", "list experiment kinds");
  std::string kind;
  CLI::App* describe = app.add_subcommand("describe", "describe one experiment kind");
  describe->add_option("kind", kind, "experiment kind")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& k : ivlab::list_experiments()) std::cout << k << "\n";
      return 0;
    }
    if (describe->parsed()) {
      std::cout << ivlab::describe_experiment(kind) << "\n";
      return 0;
    }
    ivlab::ExperimentConfig cfg = ivlab::load_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (threads > 0) cfg.threads = threads;
    if (seed_set) cfg.seed = seed_override;
    const ivlab::RunResult res = ivlab::run_experiment(cfg);
    if (res.exit_code == 3)
      std::cerr << "solver abort: " << res.message << "\n";
    else if (res.exit_code == 1)
      std::cerr << "one or more configured checks failed (see results.csv)\n";
    return res.exit_code;
  } catch (const ivlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
