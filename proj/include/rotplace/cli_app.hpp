#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rotplace {

// One experiment invocation. `run_experiment` is the in-process entry the
// binary and the tests share; `run_cli` adds flag parsing on top.
struct ExperimentConfig {
  std::string command;        // area | expected-count | measure | place | transport | sharpness
  std::string region_path;    // M
  std::string region2_path;   // M' (transport only)
  std::string points_spec;    // preset name or point-set JSON path
  int n = 0;                  // preset size where it applies (n-gon)
  std::uint64_t seed = 1;
  std::uint64_t samples = 1000000;
  std::uint64_t budget = 100000;
  bool budget_set = false;
  int streams = 4;
  std::string out_path;       // command artifact (plan/rotation JSON); CSV tee for the rest
  std::string validate_path;  // transport: re-check this stored plan instead of building
};

// Writes the CSV header plus one row per invocation to `out`, diagnostics to
// `err`. Exit codes: 0 ok, 2 placement not found within budget, 3 transport
// plan validation failed, 4 input/parse error.
int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

// argv-style front end (excluding the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rotplace
