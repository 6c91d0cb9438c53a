#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "schwarz/harness.hpp"
#include "schwarz/instances.hpp"

namespace schwarz {

/// Configuration problems (unknown keys, bad types, inconsistent values).
/// Distinct from numeric failures so the CLI can map them to exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct WeightsConfig {
  std::string kind = "uniform"; // uniform | geometric | explicit
  double ratio = 0.85;          // geometric decay
  Vector values;                // explicit
};

struct InstanceConfig {
  std::string type = "orthonormal"; // orthonormal | unit_dictionary | rkhs | collective
  int dim = 2;
  WeightsConfig weights{};
  // unit_dictionary
  int atom_count = 0; // 0 = dim
  std::uint64_t atom_seed = 1;
  // rkhs
  std::string kernel = "gaussian"; // gaussian | min_plus_one
  double width = 0.2;
  int nodes = 64;
  double jitter = 1e-10;
  // collective
  int n = 1;
  std::uint64_t phi_seed = 2;
};

struct TargetConfig {
  std::string kind = "hs_element"; // hs_element | coeffs | basis | phi
  double s = 0.5;
  std::string coeffs = "random"; // random | flat (for hs_element)
  std::uint64_t coeff_seed = 1;
  Vector values; // explicit coefficients (hs_element or ambient coordinates)
  int basis_index = 0;
};

struct SolverConfig {
  std::string variant = "random"; // random | omp | greedy | noisy
  double beta = 1.0;
  double sigma = 0.0;
  std::string xi_schedule = "optimal"; // optimal | prescribed
  double xi0 = 1.0;
};

struct RunConfig {
  InstanceConfig instance{};
  TargetConfig target{};
  SolverConfig solver{};
  int m_max = 64;
  int runs = 100;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string csv_path;
  std::string json_path;
};

RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::string& path);

/// A built problem setting: the instance, the concrete target, and enough
/// description to label reports.
struct BuiltSetup {
  Instance instance;
  Vector target;
  std::string description;
  std::optional<SpectralDecomposition> decomp; // present when a covariance exists
};

BuiltSetup build_setup(const RunConfig& config);

SolverSpec solver_spec_from(const SolverConfig& config);

/// Weight vector for n atoms according to the configuration.
Vector make_weights(const WeightsConfig& config, int n);

} // namespace schwarz
