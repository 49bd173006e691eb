#pragma once

#include "memristor/device.hpp"
#include "memristor/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace memristor {

/// Bad or inconsistent scenario input. `field` is the dotted config key, and
/// `assumption` the standing assumption (A1..A4) it violates, if any.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message, std::string assumption = {});

  const std::string& field() const { return field_; }
  const std::string& assumption() const { return assumption_; }

 private:
  std::string field_;
  std::string assumption_;
};

enum class BoundaryMode { Equilibrium, Bias, Ramp };
const char* to_string(BoundaryMode mode);

/// Initial profile of one density: the boundary extension ("equilibrium") or
/// an explicit profile.
struct InitialProfile {
  bool from_boundary = false;
  Profile profile;
};

struct Scenario {
  std::string name;
  /// Directory of the config file; relative paths inside it resolve here.
  std::filesystem::path base_dir;

  // [device]
  GeometrySpec geometry;
  double lambda = 1.0;
  double final_time = 1.0;
  Profile doping = Profile::constant(0.0);
  InitialProfile n0{true, {}}, p0{true, {}};
  InitialProfile D0{false, Profile::constant(0.5)};
  /// Relative amplitude of the seeded uniform perturbation applied to n0, p0, D0.
  double perturbation = 0.0;
  std::uint64_t seed = 1;

  // [boundary]
  BoundaryMode mode = BoundaryMode::Equilibrium;
  double n_bar = 1.0;
  double p_bar = 1.0;
  /// Potential on all contacts in equilibrium mode.
  double V0 = 0.0;
  /// Applied voltage (final value in ramp mode) on the second contact.
  double U = 0.0;
  double ramp_time = 0.0;

  // [solver]
  SolverConfig solver;

  // [output]
  std::string output_dir;
  std::vector<double> dump_times;
  /// Sup-norm ceiling of n, p as a multiple of the initial and boundary maxima.
  double ceiling_factor = 10.0;
  bool write_states = true;
};

/// Reads a TOML scenario. Throws ConfigError naming the offending key.
Scenario load_scenario(const std::filesystem::path& path);
/// Same as load_scenario with `key=value` assignments (dotted keys, TOML
/// values) applied to the document before interpretation.
Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& assignments);
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = ".",
                        const std::vector<std::string>& assignments = {});

/// Command-line overrides.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<int> cells;
  std::optional<double> tend;
};
void apply_overrides(Scenario& scenario, const Overrides& overrides);

/// Mesh, parameters, boundary data and validated initial state of a scenario.
struct Setup {
  DeviceMesh mesh;
  ModelParameters params;
  /// Boundary extension at time t (constant except in ramp mode).
  BoundaryProvider boundary;
  /// Extension at t = 0.
  BoundaryExtension bc0;
  SystemState initial;
  double mean_D0 = 0.0;
};

/// Builds everything needed for a run. Violations of A1..A4 and other input
/// errors are reported as ConfigError.
Setup build_setup(const Scenario& scenario);

/// Boundary data for a given applied voltage.
BoundaryData boundary_data(const Scenario& scenario, const DeviceMesh& mesh, double U);

}  // namespace memristor
