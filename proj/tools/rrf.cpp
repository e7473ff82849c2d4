#include "rrf/experiments.hpp"

#include <CLI11.hpp>

#include <exception>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Randomized range approximation experiments"};
  std::string config_path;
  std::uint64_t seed = 0;
  int runs = 0;
  int threads = 0;
  std::string out;
  app.add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Experiment seed");
  auto* runs_opt = app.add_option("--runs", runs, "Number of Monte Carlo runs")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", out, "Output directory");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    auto config = rrf::experiments::load_config(config_path);
    if (*seed_opt) config.seed = seed;
    if (*runs_opt) config.runs = runs;
    if (*out_opt) config.output = out;
    if (*threads_opt) config.threads = threads;
    rrf::experiments::run(config, std::clog);
  } catch (const rrf::experiments::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
