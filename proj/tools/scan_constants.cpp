// Measures the envelope constants checked by `memristor verify` and writes
// data/derived_constants.csv plus the g' envelope fixture.
//
//   memristor-scan [output-dir]
//
// The g' envelopes are scanned with the long-double reference integrator from
// tests/oracle, so the frozen brackets do not depend on the library's tables.
// The truncation lattice uses the library functions, which the unit tests
// compare against nested reference quadrature.

#include "memristor/derived_constants.hpp"
#include "memristor/regularization.hpp"
#include "memristor/statistics.hpp"
#include "memristor/verification.hpp"
#include "quadrature_oracle.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

namespace {

using memristor::kDerivedSafetyFactor;
namespace verify = memristor::verify;

double oracle_g_prime(double z) {
  const oracle::real y = oracle::inverse_fd_half(z);
  return static_cast<double>(1.0L / oracle::fermi_dirac(-0.5L, y));
}

struct Extremes {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

std::string today() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%d", std::gmtime(&now));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : MEMRISTOR_DATA_DIR;
  const auto start = std::chrono::steady_clock::now();

  // g' and (z g')' envelopes on [1e-8, 1e8]
  Extremes a3, a4;
  double library_gap = 0.0;
  std::vector<std::array<double, 3>> rows;
  for (double z : verify::envelope_grid()) {
    const double gp = oracle_g_prime(z);
    library_gap = std::max(library_gap, std::abs(memristor::g_prime(z) / gp - 1.0));
    const double r3 = verify::gprime_envelope_ratio(z, gp);
    const double r4 = verify::zgprime_envelope_ratio(z, oracle_g_prime);
    a3.add(r3);
    a4.add(r4);
    rows.push_back({z, gp, r3});
  }
  std::cerr << "envelopes scanned; max |library/oracle - 1| for g' = " << library_gap << "\n";

  // truncated energy lattice
  double c24 = 0.0;
  int n24 = 0;
  for (int k : verify::lattice_k()) {
    for (double delta : verify::lattice_delta()) {
      const memristor::TruncationLevel level(k, delta);
      for (double s : verify::lattice_s()) {
        c24 = std::max(c24, verify::trunc_energy_ratio(level, s));
        ++n24;
      }
    }
  }
  // coercivity lattice (delta = 0)
  double s53 = 0.0, T76 = 0.0, gt107 = 0.0, T53 = 0.0;
  int n26 = 0;
  for (int k : verify::lattice_k()) {
    for (double s : verify::lattice_s()) {
      const auto q = verify::coercivity_ratios(k, s);
      s53 = std::max(s53, q.s53);
      T76 = std::max(T76, q.T76);
      gt107 = std::max(gt107, q.gt107);
      T53 = std::max(T53, q.T53);
      ++n26;
    }
  }
  std::cerr << "lattices scanned: " << n24 << " (truncated energy), " << n26 << " (coercivity) combinations\n";

  const double c1 = a3.lo / kDerivedSafetyFactor, c2 = a3.hi * kDerivedSafetyFactor;
  const std::string path = dir + "/derived_constants.csv";
  std::ofstream out(path);
  if (!out) {
    std::cerr << "cannot write " << path << "\n";
    return 1;
  }
  out.precision(17);
  out << "# Envelope constants: observed extreme times " << kDerivedSafetyFactor
      << " (lower bounds divided by it). Regenerate with memristor-scan.\n"
      << "# generated " << today() << "\n"
      << "# z grid: 400 log-spaced points in [1e-8, 1e8]; g' from the long-double reference integrator"
      << " (tolerance 1e-18 of the integral), finite-difference step 1e-3 z\n"
      << "# lattice: k in {1,2,5,10,50}; delta in {0.01,0.1,0.5} (truncated energy) or 0 (coercivity); s: 25 log-spaced points in"
      << " [1e-3, 1e3]; library quadrature tolerance 1e-10\n"
      << "name,value,observed,description\n";
  auto row = [&out](const char* name, double value, double observed, const char* what) {
    out << name << ',' << value << ',' << observed << ',' << what << '\n';
  };
  row("gprime_lower", c1, a3.lo, "lower bracket of g'(z)/(1/z + z^(-1/3))");
  row("gprime_upper", c2, a3.hi, "upper bracket of g'(z)/(1/z + z^(-1/3))");
  row("zgprime_upper", a4.hi * kDerivedSafetyFactor, a4.hi, "(z g')' <= C (1 below F_1/2(0), z^(-1/3) above)");
  row("trunc_energy", c24 * kDerivedSafetyFactor, c24, "T_k(s)^(5/3) <= C (1 + G_k_delta(s))");
  row("coercive_s53", s53 * kDerivedSafetyFactor, s53, "s^(5/3) <= C (G_k(s) + 1)");
  row("coercive_T76", T76 * kDerivedSafetyFactor, T76, "T_k(s)^(7/6) <= C g~_k(s)");
  row("coercive_gt107", gt107 * kDerivedSafetyFactor, gt107, "g~_k(s)^(10/7) <= C (G_k(s) + 1)");
  row("coercive_T53", T53 * kDerivedSafetyFactor, T53, "T_k(s)^(5/3) <= C (G_k(s) + 1)");

  std::ofstream env(dir + "/gprime_envelope.csv");
  env.precision(17);
  env << "z,g_prime,ratio,verdict\n";
  for (const auto& r : rows) {
    env << r[0] << ',' << r[1] << ',' << r[2] << ',' << (r[2] >= c1 && r[2] <= c2 ? "inside" : "outside") << '\n';
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "wrote " << path << " in " << seconds << " s\n";
  return 0;
}
