// Experiment runner: parses a JSON config, dispatches to the computation
// modules, writes result.json / results.csv, and prints a one-line summary.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "lka/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"learning and knowledge acquisition experiment runner"};

  lka::RunOptions opts;
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option("--config", opts.config_path, "experiment config (JSON)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "seed override (wins over the config)");
  app.add_option("--out", opts.out_dir, "output directory (default: current)");
  app.add_option("--threads", opts.threads, "worker threads, 0 = all cores");
  app.add_flag("--no-timestamp", opts.no_timestamp,
               "omit the timestamp field from result.json");

  CLI11_PARSE(app, argc, argv);
  seed_given = seed_opt->count() > 0;
  if (seed_given) opts.seed_override = seed;

  // LKA_THREADS mirrors --threads; the flag wins on conflict
  if (opts.threads == 0) {
    if (const char* env = std::getenv("LKA_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v > 0) opts.threads = int(v);
    }
  }

  return lka::run_experiment(opts, std::cout, std::cerr);
}
