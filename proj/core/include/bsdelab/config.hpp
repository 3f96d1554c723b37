#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

namespace bsdelab {

// One experiment instance: generator + terminal + gauge + discretization +
// experiment-specific knobs. Parsed from INI-style files; round-trips through
// serialize_config losslessly (%.17g floats, canonical key order).
struct ExperimentConfig {
  // [instance]
  std::string name = "experiment";
  // [generator]
  std::string driver = "zero";
  std::string f0 = "zero";
  double f0_value = 0.0;
  double beta = 0.0;
  double gamma = 1.0;
  // [terminal]
  std::string terminal = "constant";
  double terminal_c = 1.0;
  // [psi]
  double mu = 2.0;
  // [grid]
  double T = 1.0;
  int n_steps = 100;
  // [ensemble]
  int d = 1;
  std::uint64_t M = 10000;
  std::uint64_t seed = 42;
  // [solver]
  int basis_degree = 4;
  double theta = 0.5;
  double tol = 1e-12;
  int max_iter = 100;
  double ridge = 1e-10;
  // [truncation]
  std::vector<int> n_levels = {1, 2, 4, 8};
  std::vector<int> p_levels = {1, 2, 4, 8};
  // [stopping]
  std::vector<double> levels = {0.5, 1, 2, 4, 8};
  // [psi_check]
  std::uint64_t psi_samples = 100000;
  std::uint64_t psi_seed = 7;
  double psi_x_max = 1e6;
  double psi_param_max = 5.0;
  // [gauss]
  int from_step = 0;
  // [uniqueness]
  std::uint64_t seed_b = 43;
  int basis_degree_b = 5;
  double allowance = 0.01;
  double rep_tolerance = 0.05;
  bool negative_control = false;
  // [output]
  std::string dir;

  bool operator==(const ExperimentConfig&) const = default;
};

// Throws ConfigError (with line and field) on unknown sections/keys or
// malformed values. A [run] section is tolerated and ignored so emitted run
// manifests can be fed back in directly.
ExperimentConfig parse_config(std::istream& in, const std::string& source_name = "<stream>");
ExperimentConfig parse_config_file(const std::string& path);

std::string serialize_config(const ExperimentConfig& cfg);

// Range/catalog validation beyond syntax; throws ConfigError naming the field.
void validate(const ExperimentConfig& cfg);

}  // namespace bsdelab
