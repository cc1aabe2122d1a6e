#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nln/params.hpp"

namespace nln {

// One batch run: a command plus everything needed to reproduce it. Defaults
// here are the documented CLI defaults; parse_config starts from them.
struct RunConfig {
  std::string command;  // verify | eigen | heat | poisson | mountainpass
  Params params;
  double a = 0.0, b = 1.0;
  int n_interior = 16;
  int n_exterior = 16;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int threads = 1;
  int max_iter = 50000;
  // heat
  double tau = 0.01;
  int n_steps = 100;
  std::string u0 = "hat";  // hat | constant | gauss | linear
  std::vector<double> snapshots;
  // poisson
  std::string source = "constant";  // constant | linear | gauss | zero
  double source_value = 1.0;
  // mountainpass
  std::string sign = "plus";  // plus | minus
  int n_seeds = 2;
};

struct InvariantRecord {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation = "<=";  // pass iff (value relation threshold)
  bool pass = false;
};

struct RunManifest {
  std::string config_echo;  // full config as pretty JSON
  double wall_seconds = 0.0;
  int threads = 1;
  std::string error;  // nonempty when a solver failure aborted the command
  std::vector<InvariantRecord> invariants;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<std::string> files;  // everything written to output_dir

  bool all_pass() const;
};

// Strict JSON config parsing: defaults filled, unknown keys rejected by name,
// enums and ranges validated with messages naming the offending field.
// Throws config_error.
RunConfig parse_config(const std::string& text);

// Executes the configured command, writing all artifacts plus manifest.json
// into output_dir. Solver failures are captured in manifest.error (partial
// manifest still written); configuration problems throw config_error.
// NLNEUMANN_THREADS overrides the configured thread count.
RunManifest run(const RunConfig& config);

// Glue for the CLI binary: parses config_text, forces the command named on
// the command line (a differing "command" key in the file is a config_error),
// applies the optional output-dir override, then runs.
RunManifest run_command(const std::string& command,
                        const std::string& config_text,
                        const std::string& out_override);

// 0: all invariants pass and no error; 1: solver failure or failed invariant.
// (Config errors never reach a manifest: they throw and the CLI exits 2.)
int exit_code(const RunManifest& manifest);

}  // namespace nln
