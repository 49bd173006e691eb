#pragma once

#include "memristor/derived_constants.hpp"
#include "memristor/regularization.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace memristor::verify {

// Sample sets shared by the scan tool (which freezes the constants) and the
// verification suites (which check against them).

std::vector<double> log_grid(double lo, double hi, int count);
/// z in [1e-8, 1e8], 400 log-spaced points.
std::vector<double> envelope_grid();
std::vector<int> lattice_k();        // {1, 2, 5, 10, 50}
std::vector<double> lattice_delta();  // {0.01, 0.1, 0.5}
/// s in [1e-3, 1e3], 25 log-spaced points.
std::vector<double> lattice_s();
/// s in (0, 1): 25 points, log-spaced towards 0 and mirrored towards 1.
std::vector<double> vacancy_s();

using ScalarFn = std::function<double(double)>;

/// g'(z) / (z^{-1} + z^{-1/3}).
double gprime_envelope_ratio(double z, double g_prime_value);
/// Central difference of z g'(z) with relative step 1e-3, divided by
/// 1 for z < F_{1/2}(0) and z^{-1/3} above.
double zgprime_envelope_ratio(double z, const ScalarFn& g_prime);

/// T_k(s)^{5/3} / (1 + G_{k,delta}(s)).
double trunc_energy_ratio(const TruncationLevel& level, double s);

/// (G'_k(s + h) - G'_k(s - h)) / (2h) with h = 1e-4 s, evaluated as one integral.
double Gk_second_difference(const TruncationLevel& level, double s);

struct CoercivityRatios {
  double gprime_over_Gk2;  // g'(s) / G_k''(s), must be <= 1
  double s53;              // s^{5/3} / (G_k(s) + 1)
  double T76;              // T_k(s)^{7/6} / g~_k(s)
  double gt107;            // g~_k(s)^{10/7} / (G_k(s) + 1)
  double T53;              // T_k(s)^{5/3} / (G_k(s) + 1)
};
CoercivityRatios coercivity_ratios(int k, double s);

struct Check {
  std::string name;
  int points = 0;
  int violations = 0;
  /// Largest observed ratio (or error) against `limit`.
  double worst = 0.0;
  double limit = 0.0;
  std::string note;

  bool passed() const { return violations == 0; }
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  double seconds = 0.0;

  bool passed() const;
};

/// appendix-a, lemma-2-4, lemma-2-6, poincare, statistics-roundtrip.
const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);

/// Runs one suite; throws std::invalid_argument for an unknown name.
SuiteResult run_suite(const std::string& name, const DerivedConstants& constants, std::uint64_t seed = 20240607);

/// Pass/fail table with one line per check.
std::string format_suite(const SuiteResult& result);

}  // namespace memristor::verify
