#include "memristor/verification.hpp"

#include "memristor/device.hpp"
#include "memristor/diagnostics.hpp"
#include "memristor/quadrature.hpp"
#include "memristor/statistics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace memristor::verify {

namespace {

// Largest ratio over the samples, counting entries above `limit`.
void record(Check& c, double ratio, double limit) {
  ++c.points;
  c.worst = std::max(c.worst, ratio);
  if (!(ratio <= limit)) ++c.violations;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

SuiteResult statistics_roundtrip() {
  SuiteResult r{"statistics-roundtrip", {}, 0.0};
  Check c{"inverse_fd_half(F_1/2(y)) = y, y in [-30, 50]", 0, 0, 0.0, 1e-8, "absolute error"};
  const int count = 500;
  for (int i = 0; i < count; ++i) {
    const double y = -30.0 + 80.0 * i / (count - 1);
    record(c, std::abs(inverse_fd_half(fd_half(y)) - y), c.limit);
  }
  r.checks.push_back(c);
  return r;
}

SuiteResult envelope_suite(const DerivedConstants& dc) {
  SuiteResult r{"appendix-a", {}, 0.0};
  // Small-argument bracket for z <= 0: e^z/2 <= F_j(z) <= e^z. Ratios F/e^z must lie in [1/2, 1].
  const auto negative = log_grid(1e-4, 300.0, 400);
  for (double j : {-0.5, 0.5}) {
    Check lo{"e^z/2 <= F_" + std::string(j < 0 ? "-1/2" : "1/2") + "(z), z <= 0", 0, 0, 0.0, 0.0, "max of e^z/2 - F"};
    Check hi{"F_" + std::string(j < 0 ? "-1/2" : "1/2") + "(z) <= e^z, z <= 0", 0, 0, 0.0, 0.0, "max of F - e^z"};
    lo.worst = hi.worst = -std::numeric_limits<double>::infinity();
    for (double a : negative) {
      const double z = -a;
      const double f = fermi_dirac(FermiDiracOrder(j), z), e = std::exp(z);
      record(lo, 0.5 * e - f, 0.0);
      record(hi, f - e, 0.0);
    }
    r.checks.push_back(lo);
    r.checks.push_back(hi);
  }
  // Large-argument bracket for z > 0, j = 1/2.
  {
    const double j = 0.5;
    Check lo{"z^{3/2}/(2 Gamma(5/2)) + 1/2 <= F_1/2(z), z > 0", 0, 0, 0.0, 0.0, "max of bound - F"};
    Check hi{"F_1/2(z) <= z^{3/2}/Gamma(5/2) + (2z)^{1/2}/Gamma(3/2) + 2^{1/2}, z > 0", 0, 0, 0.0, 0.0,
             "max of F - bound"};
    lo.worst = hi.worst = -std::numeric_limits<double>::infinity();
    for (double z : log_grid(1e-4, 100.0, 400)) {
      const double f = fd_half(z);
      const double lower = std::pow(z, j + 1) / (2.0 * std::tgamma(j + 2)) + 0.5;
      const double upper = std::pow(z, j + 1) / std::tgamma(j + 2) + std::pow(2 * z, j) / std::tgamma(j + 1) +
                           std::pow(2.0, j);
      record(lo, lower - f, 0.0);
      record(hi, f - upper, 0.0);
    }
    r.checks.push_back(lo);
    r.checks.push_back(hi);
  }
  // Derivative identity F'_{1/2} = F_{-1/2}, central differences.
  {
    Check c{"dF_1/2/dz = F_-1/2 (central differences)", 0, 0, 0.0, 1e-6, "relative error"};
    for (int i = 0; i < 50; ++i) {
      const double z = -20.0 + 70.0 * i / 49.0;
      const double h = 1e-4 * std::max(1.0, std::abs(z));
      const double fd = (fd_half(z + h) - fd_half(z - h)) / (2 * h);
      record(c, std::abs(fd / fd_minus_half(z) - 1.0), c.limit);
    }
    r.checks.push_back(c);
  }
  // g' envelope and (z g')' bound on [1e-8, 1e8].
  {
    const double c1 = dc.get("gprime_lower"), c2 = dc.get("gprime_upper"), C = dc.get("zgprime_upper");
    Check lo{"g'(z)/(1/z + z^{-1/3}) >= c1", 0, 0, 0.0, 1.0, "max of c1/ratio; c1 = " + std::to_string(c1)};
    Check hi{"g'(z)/(1/z + z^{-1/3}) <= c2", 0, 0, 0.0, 1.0, "max of ratio/c2; c2 = " + std::to_string(c2)};
    Check zg{"(z g')' <= C (1_{z<F0} + z^{-1/3} 1_{z>=F0})", 0, 0, 0.0, 1.0,
             "max of ratio/C; C = " + std::to_string(C)};
    for (double z : envelope_grid()) {
      const double ratio = gprime_envelope_ratio(z, g_prime(z));
      record(lo, c1 / ratio, 1.0);
      record(hi, ratio / c2, 1.0);
      record(zg, zgprime_envelope_ratio(z, [](double x) { return g_prime(x); }) / C, 1.0);
    }
    r.checks.push_back(lo);
    r.checks.push_back(hi);
    r.checks.push_back(zg);
  }
  return r;
}

SuiteResult truncation_suite(const DerivedConstants& dc) {
  SuiteResult r{"lemma-2-4", {}, 0.0};
  const double C = dc.get("trunc_energy");
  Check c{"T_k(s)^{5/3} <= C (1 + G_{k,delta}(s))", 0, 0, 0.0, 1.0, "max of ratio/C; C = " + std::to_string(C)};
  for (int k : lattice_k()) {
    for (double delta : lattice_delta()) {
      const TruncationLevel level(k, delta);
      for (double s : lattice_s()) record(c, trunc_energy_ratio(level, s) / C, 1.0);
    }
  }
  r.checks.push_back(c);
  return r;
}

SuiteResult coercivity_suite(const DerivedConstants& dc) {
  SuiteResult r{"lemma-2-6", {}, 0.0};
  const double C_s53 = dc.get("coercive_s53"), C_T76 = dc.get("coercive_T76"), C_gt = dc.get("coercive_gt107"),
               C_T53 = dc.get("coercive_T53");
  Check gp{"g'(s) <= G_k''(s) (finite differences)", 0, 0, 0.0, 1.0 + 1e-6, "max of g'/G_k''"};
  Check s53{"s^{5/3} <= C (G_k(s) + 1)", 0, 0, 0.0, 1.0, "max of ratio/C; C = " + std::to_string(C_s53)};
  Check T76{"T_k(s)^{7/6} <= C g~_k(s)", 0, 0, 0.0, 1.0, "max of ratio/C; C = " + std::to_string(C_T76)};
  Check gt{"g~_k(s)^{10/7} <= C (G_k(s) + 1)", 0, 0, 0.0, 1.0, "max of ratio/C; C = " + std::to_string(C_gt)};
  Check T53{"T_k(s)^{5/3} <= C (G_k(s) + 1)", 0, 0, 0.0, 1.0, "max of ratio/C; C = " + std::to_string(C_T53)};
  Check ht{"h~_k'(s) >= max(s^{-1/2}, 1)", 0, 0, 0.0, 1.0, "max of max(s^{-1/2},1)/h~_k'"};
  for (int k : lattice_k()) {
    for (double s : lattice_s()) {
      const auto q = coercivity_ratios(k, s);
      record(gp, q.gprime_over_Gk2, gp.limit);
      record(s53, q.s53 / C_s53, 1.0);
      record(T76, q.T76 / C_T76, 1.0);
      record(gt, q.gt107 / C_gt, 1.0);
      record(T53, q.T53 / C_T53, 1.0);
    }
    const TruncationLevel level(k, 0.0);
    for (double s : vacancy_s()) {
      record(ht, std::max(1.0 / std::sqrt(s), 1.0) / h_tilde_k_delta_prime(level, s), 1.0);
    }
  }
  for (auto* c : {&gp, &s53, &T76, &gt, &T53, &ht}) r.checks.push_back(*c);
  return r;
}

SuiteResult poincare(std::uint64_t seed) {
  SuiteResult r{"poincare", {}, 0.0};
  GeometrySpec spec;
  spec.cells_x = 32;
  spec.contacts = {{"left", Side::Left}};
  const DeviceMesh mesh = build_mesh(spec);
  const double C_P = poincare_constant(mesh);
  // Uniform 1D Neumann Laplacian: smallest nonzero eigenvalue (4/h^2) sin^2(pi/(2N)).
  const double h = 1.0 / spec.cells_x;
  const double analytic = 1.0 / (4.0 / (h * h) * std::pow(std::sin(std::numbers::pi / (2.0 * spec.cells_x)), 2));
  Check cp{"C_P spectral gap vs closed form (uniform 1D)", 1, 0, std::abs(C_P / analytic - 1.0), 1e-10,
           "relative difference; C_P = " + std::to_string(C_P)};
  if (!(cp.worst <= cp.limit)) cp.violations = 1;
  r.checks.push_back(cp);

  std::mt19937_64 rng(seed);
  Check trials{"slack >= 0, u ~ U(0, 0.9), 100 trials", 0, 0, 0.0, 0.0, "max of -slack/bound"};
  trials.worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < 100; ++t) {
    CellField u(mesh.num_cells());
    for (int i = 0; i < u.size(); ++i) u[i] = 0.9 * uniform01(rng);
    const double mean = u.mean();
    const double u_hat = mean + (0.95 - mean) * uniform01(rng) * 0.5 + 1e-3;
    const auto res = poincare_check(u, mesh, u_hat, C_P);
    record(trials, -res.slack / res.bound, 0.0);
  }
  r.checks.push_back(trials);

  Check stress{"stress: one cell at 1 - 1e-9, mean 0.3, u_hat = 0.6", 1, 0, 0.0, 0.0, "finite positive slack"};
  CellField u = CellField::Constant(mesh.num_cells(), 0.0);
  u[0] = 1.0 - 1e-9;
  const double rest = (0.3 * mesh.num_cells() - u[0]) / (mesh.num_cells() - 1);
  for (int i = 1; i < u.size(); ++i) u[i] = rest;
  const auto res = poincare_check(u, mesh, 0.6, C_P);
  stress.worst = -res.slack;
  if (!(std::isfinite(res.slack) && res.slack > 0.0)) stress.violations = 1;
  r.checks.push_back(stress);
  return r;
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out;
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) out.push_back(std::exp(a + (b - a) * i / (count - 1)));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> envelope_grid() { return log_grid(1e-8, 1e8, 400); }
std::vector<int> lattice_k() { return {1, 2, 5, 10, 50}; }
std::vector<double> lattice_delta() { return {0.01, 0.1, 0.5}; }
std::vector<double> lattice_s() { return log_grid(1e-3, 1e3, 25); }

std::vector<double> vacancy_s() {
  std::vector<double> out = log_grid(1e-6, 0.5, 13);
  for (int i = 11; i >= 0; --i) out.push_back(1.0 - out[static_cast<std::size_t>(i)]);
  return out;
}

double gprime_envelope_ratio(double z, double g_prime_value) { return g_prime_value / (1.0 / z + std::cbrt(1.0 / z)); }

double zgprime_envelope_ratio(double z, const ScalarFn& g_prime_fn) {
  const double h = 1e-3 * z;
  const double d = ((z + h) * g_prime_fn(z + h) - (z - h) * g_prime_fn(z - h)) / (2.0 * h);
  const double envelope = z < fd_half_at_zero() ? 1.0 : std::cbrt(1.0 / z);
  return d / envelope;
}

double trunc_energy_ratio(const TruncationLevel& level, double s) {
  return std::pow(trunc_T(static_cast<double>(level.k()), s), 5.0 / 3.0) / (1.0 + G_k_delta(level, s));
}

double Gk_second_difference(const TruncationLevel& level, double s) {
  // G_k'' is smooth on either side of the kink at k, so one Gauss-Legendre
  // panel per side is exact to roundoff; adaptive rules chase the ~1e-14
  // noise of g' instead.
  const double h = 1e-4 * s;
  const double knot = level.k();
  auto w = [&](double z) { return G_k_delta_second(level, z); };
  double total;
  if (knot > s - h && knot < s + h) {
    total = quad::integrate_panels(w, s - h, knot, 2.0 * h) + quad::integrate_panels(w, knot, s + h, 2.0 * h);
  } else {
    total = quad::integrate_panels(w, s - h, s + h, 2.0 * h);
  }
  return total / (2.0 * h);
}

CoercivityRatios coercivity_ratios(int k, double s) {
  const TruncationLevel level(k, 0.0);
  const double G = G_k_delta(level, s);
  const double gt = g_tilde_k_delta(level, s);
  const double T = trunc_T(static_cast<double>(k), s);
  CoercivityRatios q;
  q.gprime_over_Gk2 = g_prime(s) / Gk_second_difference(level, s);
  q.s53 = std::pow(s, 5.0 / 3.0) / (G + 1.0);
  q.T76 = std::pow(T, 7.0 / 6.0) / gt;
  q.gt107 = std::pow(gt, 10.0 / 7.0) / (G + 1.0);
  q.T53 = std::pow(T, 5.0 / 3.0) / (G + 1.0);
  return q;
}

bool SuiteResult::passed() const {
  for (const auto& c : checks) {
    if (!c.passed()) return false;
  }
  return true;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"statistics-roundtrip", "appendix-a", "lemma-2-4", "lemma-2-6",
                                              "poincare"};
  return names;
}

bool is_suite(const std::string& name) {
  for (const auto& n : suite_names()) {
    if (n == name) return true;
  }
  return false;
}

SuiteResult run_suite(const std::string& name, const DerivedConstants& constants, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult r;
  if (name == "statistics-roundtrip") {
    r = statistics_roundtrip();
  } else if (name == "appendix-a") {
    r = envelope_suite(constants);
  } else if (name == "lemma-2-4") {
    r = truncation_suite(constants);
  } else if (name == "lemma-2-6") {
    r = coercivity_suite(constants);
  } else if (name == "poincare") {
    r = poincare(seed);
  } else {
    throw std::invalid_argument("unknown verification suite '" + name + "'");
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string format_suite(const SuiteResult& result) {
  std::ostringstream out;
  out << "suite " << result.suite << " (" << result.checks.size() << " checks, ";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f s", result.seconds);
  out << buf << ")\n";
  for (const auto& c : result.checks) {
    std::snprintf(buf, sizeof buf, "%.6g", c.worst);
    out << "  " << (c.passed() ? "PASS" : "FAIL") << "  " << c.name << "  [" << c.points << " points, "
        << c.violations << " violations, worst " << buf << " vs " << c.limit << "; " << c.note << "]\n";
  }
  out << "  => " << (result.passed() ? "pass" : "fail") << "\n";
  return out.str();
}

}  // namespace memristor::verify
