#include <CLI11.hpp>

#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sgch: spectral experiments for the stochastic generalized Camassa-Holm equation"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  auto* run = app.add_subcommand("run", "Run the experiment described by a TOML config");
  run->add_option("config", config, "Config file")->required();
  run->add_option("--seed", seed, "Master seed (overrides SGCH_SEED and the config)");
  run->add_option("--threads", threads, "Worker threads, 0 = hardware (overrides SGCH_THREADS)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--out", out, "Output directory");

  app.add_subcommand("list", "List experiment kinds with their minimal configs");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand("list")) {
    sgch::cli::print_catalogue(std::cout);
    return 0;
  }

  sgch::cli::Overrides flags;
  flags.seed = seed;
  flags.threads = threads;
  if (out) flags.out = *out;
  const auto overrides = sgch::cli::merge(flags, sgch::cli::environment_overrides(std::cerr));
  const auto result = sgch::cli::run_file(config, overrides, std::cout);
  if (!result.message.empty()) std::cerr << result.message << '\n';
  if (!result.output_dir.empty()) std::cout << "outputs in " << result.output_dir.string() << '\n';
  return static_cast<int>(result.status);
}
