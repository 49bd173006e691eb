#pragma once

#include "memristor/derived_constants.hpp"
#include "memristor/diagnostics.hpp"
#include "memristor/scenario.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace memristor {

/// Header of steps.csv.
inline constexpr const char* kStepLogHeader =
    "step,t,dt,gummel_iters,newton_iters,residual,E,dissipation,mass_D,min_n,max_n,min_p,max_p,min_D,max_D,"
    "energy_decay_ok";

/// $MEMRISTOR_OUTPUT_ROOT if set, the working directory otherwise.
std::filesystem::path output_root();
/// Scenario output directory; relative directories resolve under output_root().
std::filesystem::path output_directory(const Scenario& scenario);

/// Gronwall constants for Lambda > 0: c1 = C_trunc, c = 2 (1 + C_trunc) m(Omega), with C_trunc the truncated energy constant.
InequalityOptions inequality_options(const DerivedConstants& constants, double domain_measure, double newton_tol);

struct RunResult {
  enum class Status { Ok, SolverFailure };
  Status status = Status::Ok;
  std::string message;
  /// "energy_decay: pass", "energy_decay: fail" or "energy_decay: not asserted (Lambda > 0)".
  std::string verdict;
  bool inequality_passed = true;
  BoundednessReport boundedness;
  std::vector<EnergyReport> reports;
  std::vector<double> dt;
  SystemState initial, final;
  double Lambda = 0.0;
  std::filesystem::path directory;
};

/// Runs a scenario and writes steps.csv, state dumps (states/) and
/// summary.json into `directory`. ConfigError propagates; solver failures are
/// recorded in the result and in summary.json.
RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& directory,
                       const DerivedConstants& constants);

/// One variant of a sweep: the assignments applied to the base config.
struct SweepVariant {
  std::vector<std::string> assignments;
  std::string label;
};

/// Cartesian product of `key=v1,v2,...` specifications.
std::vector<SweepVariant> sweep_variants(const std::vector<std::string>& specs);

struct SweepOutcome {
  SweepVariant variant;
  std::filesystem::path directory;
  int exit_code = 0;  // 0 ok, 1 config error, 2 solver failure
  std::string message;
};

/// Runs all variants of `config` with up to `jobs` worker threads; variant i
/// writes to <output>/variant_<i>. Results are in variant order.
std::vector<SweepOutcome> run_sweep(const std::filesystem::path& config, const std::vector<SweepVariant>& variants,
                                    const Overrides& overrides, const DerivedConstants& constants, int jobs);

}  // namespace memristor
