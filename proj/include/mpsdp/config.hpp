#pragma once

// Run configuration for the command-line driver.
//
// {
//   "model":  {"name": "zz_chain", "params": {"J": 1.0}, "n": 4, "seed": 0},
//   "solver": {"D": 1, "delta": 0.25, "epsilon_op": 0.5, "target_error": 0.1,
//              "cap": 1e7},
//   "run":    {"mode": "solve", "sweeps": 4, "start": "all_up",
//              "perturbation": 0.1, "state_seed": 0},
//   "output": {"path": "result.json", "emit_mps": true, "mps_path": "omega.json"}
// }
//
// Only model.name and model.n are required; everything else has a default.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpsdp/hamiltonian.hpp"

namespace mpsdp {

struct ModelConfig {
  std::string name;
  ModelParams params;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct SolverConfig {
  std::size_t D = 1;
  double delta = 0.25;
  std::optional<double> epsilon_op;
  std::optional<double> target_error;
  double cap = 1e7;
};

struct RunBlock {
  std::string mode = "solve";
  std::size_t sweeps = 4;        ///< baseline sweeps
  std::string start = "all_up";  ///< baseline start: all_up, all_down, random
  std::string seed_state = "perturbed_ground";  ///< commuting seed: perturbed_ground or solver
  double perturbation = 0.1;     ///< weight of the first excited state in the commuting seed
  std::uint64_t state_seed = 0;
};

struct OutputConfig {
  std::string path;
  bool emit_mps = false;
  std::string mps_path = "omega.json";
};

struct RunConfig {
  ModelConfig model;
  SolverConfig solver;
  RunBlock run;
  OutputConfig output;
  unsigned threads = 0;
  bool verbose = false;
};

const std::vector<std::string>& run_modes();

/// Parses and validates; throws ConfigError naming the offending field.
RunConfig parse_config(const std::string& text);

/// Re-checks cross-field constraints after command-line overrides.
void validate_config(const RunConfig& cfg);

}  // namespace mpsdp
