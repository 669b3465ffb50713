// shrinker-lab: batch driver for the built-in experiments.
//
//   shrinker-lab run <config-file> [--out DIR] [--jobs K] [--seed S]
//   shrinker-lab presets
//
// Exit status: 0 success, 1 configuration error, 2 runtime or verdict failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "shrinker/lab/config.hpp"
#include "shrinker/lab/experiments.hpp"

namespace lab = shrinker::lab;

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

int list_presets() {
  for (const auto& name : lab::preset_names()) {
    std::cout << name << "  " << lab::preset_description(name) << '\n';
  }
  return 0;
}

int run(const std::string& config_path, const std::optional<std::string>& out,
        unsigned jobs, const std::optional<std::uint64_t>& seed) {
  lab::ExperimentConfig config;
  try {
    config = lab::load_config(config_path);
    if (seed) config.seed = *seed;
    if (out) config.output = *out;
    lab::validate(config);
  } catch (const lab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  const auto results = lab::run_experiment(config, config.output, jobs);
  int status = 0;
  for (const auto& r : results) {
    std::cout << r.preset << ": " << (r.status == 0 ? "ok" : "FAILED");
    if (!r.message.empty()) std::cout << " (" << r.message << ")";
    std::cout << " -> " << r.directory.string() << '\n';
    if (r.status != 0) status = kRuntimeError;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shrinker-lab: mean curvature flow near compact shrinkers"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run the presets named in a config file");
  std::string config_path;
  std::optional<std::string> out;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
  run_cmd->add_option("config", config_path, "INI config file")->required();
  run_cmd->add_option("--out", out, "output directory (overrides experiment.output)");
  run_cmd->add_option("--jobs", jobs, "presets to run concurrently")
      ->check(CLI::Range(1u, 256u));
  run_cmd->add_option("--seed", seed, "seed for randomized perturbations");

  app.add_subcommand("presets", "list the built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (app.got_subcommand("presets")) return list_presets();
    return run(config_path, out, jobs, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
