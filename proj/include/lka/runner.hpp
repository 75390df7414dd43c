#ifndef LKA_RUNNER_HPP
#define LKA_RUNNER_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace lka {

inline constexpr const char* kVersion = "lka 0.1.0";

struct RunOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::string out_dir = ".";
  int threads = 0;  // 0 = all cores
  bool no_timestamp = false;
};

// Runs one experiment config end to end: validates, computes, writes
// result.json (and results.csv where a table applies) under out_dir, prints a
// one-line summary. Exit status 0 on success, 2 on a validation error, 3 on
// a numerical failure.
int run_experiment(const RunOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace lka

#endif
