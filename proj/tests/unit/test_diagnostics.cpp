#include "memristor/diagnostics.hpp"
#include "memristor/discretization.hpp"
#include "memristor/solver.hpp"
#include "memristor/statistics.hpp"

#include "device_fixtures.hpp"
#include "quadrature_oracle.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using namespace memristor;
using testutil::Device;

namespace {

std::vector<EnergyReport> reports_of(const std::vector<TrajectoryPoint>& traj) {
  std::vector<EnergyReport> out;
  for (const auto& p : traj) out.push_back(p.energy);
  return out;
}

SystemState snapshot_biased(const Device& d, int steps) {
  SystemState s = d.initial;
  const SolverConfig config = testutil::fixed_step(0.01);
  for (int i = 0; i < steps; ++i) s = advance(s, 0.01, d.mesh, d.bc, d.params, config);
  return s;
}

// Free energy evaluated on a uniform interval from the piecewise-constant
// fields alone: G(s|s_bar) = (y - y_bar) s - F_{3/2}(y) + F_{3/2}(y_bar) in
// long double, H by quadrature of h, and the field term over cell pairs.
long double oracle_energy(const SystemState& s, const Device& d, double n_bar, double p_bar,
                          const std::function<double(double)>& V_bar, double L) {
  using oracle::real;
  const int m = d.mesh.num_cells();
  const real h = static_cast<real>(L) / m, lambda = d.params.lambda;
  const real yn_bar = oracle::inverse_fd_half(n_bar), yp_bar = oracle::inverse_fd_half(p_bar);
  auto rel = [](real s, real y, real y_bar) {
    return (y - y_bar) * s - oracle::fermi_dirac(1.5L, y) + oracle::fermi_dirac(1.5L, y_bar);
  };
  auto hfun = [](real z) { return std::log(z) - std::log1p(-z); };
  real E = 0.0L;
  for (int K = 0; K < m; ++K) {
    const real x = (K + 0.5L) * h;
    const real yn = static_cast<real>(s.phi_n[K]) + s.V[K];
    const real yp = static_cast<real>(s.phi_p[K]) - s.V[K];
    const real vb = V_bar(static_cast<double>(x));
    E += h * (rel(s.n[K], yn, yn_bar) + rel(s.p[K], yp, yp_bar) + oracle::integrate(hfun, 0.5L, s.D[K], 1e-16L) + s.D[K] * vb);
  }
  auto w = [&](int K) { return static_cast<real>(s.V[K]) - V_bar(static_cast<double>((K + 0.5L) * h)); };
  for (int K = 0; K + 1 < m; ++K) E += 0.5L * lambda * lambda * (w(K + 1) - w(K)) * (w(K + 1) - w(K)) / h;
  // half cells to the two contacts, where V = V_bar
  E += 0.5L * lambda * lambda * (w(0) * w(0) + w(m - 1) * w(m - 1)) / (h / 2);
  return E;
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("free energy vanishes at the equilibrium extension") {
  const Device d = testutil::equilibrium_device(16);
  CHECK(d.initial.V.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(free_energy(d.initial, d.mesh, d.bc, d.params)) < 1e-15);
}

TEST_CASE("free energy increases under a density perturbation") {
  const Device d = testutil::equilibrium_device(16);
  SystemState s = d.initial;
  s.n[7] *= 1.1;
  s = make_state(s.n, s.p, s.D, s.V, 0.0);
  CHECK(free_energy(s, d.mesh, d.bc, d.params) > 0.0);
}

TEST_CASE("the equilibrium extension minimizes the free energy") {
  const Device d = testutil::equilibrium_device(12);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    CellField n = d.initial.n, p = d.initial.p, D = d.initial.D, V = d.initial.V;
    for (int K = 0; K < 12; ++K) {
      n[K] *= 1 + 0.5 * (2 * testutil::uniform(rng) - 1);
      p[K] *= 1 + 0.5 * (2 * testutil::uniform(rng) - 1);
      D[K] = 0.98 * testutil::uniform(rng) + 0.01;
      V[K] += 0.3 * (2 * testutil::uniform(rng) - 1);
    }
    // D V_bar vanishes here (V_bar = 0), so the vacancy term is H(D) >= 0
    CHECK(free_energy(make_state(n, p, D, V, 0.0), d.mesh, d.bc, d.params) > 0.0);
  }
}

TEST_CASE("free energy of a biased snapshot matches an independent evaluation") {
  const double U = 2.0;
  const Device d = testutil::biased_device(64, U, 0.5);
  const SystemState s = snapshot_biased(d, 5);
  const double E = free_energy(s, d.mesh, d.bc, d.params);
  const long double ref = oracle_energy(s, d, 1.0, 1.0, [U](double x) { return U * x; }, 1.0);
  CHECK(E > 0.0);
  CHECK(std::abs(E - static_cast<double>(ref)) <= 1e-12 * std::abs(E));
}

TEST_CASE("dissipation equals sum of flux times potential difference") {
  const Device eq = testutil::equilibrium_device(16);
  CHECK(dissipation(eq.initial, eq.mesh, eq.bc) < 1e-28);

  const Device d = testutil::biased_device(32, 3.0);
  const SystemState s = snapshot_biased(d, 3);
  for (EdgeDensity kind : {EdgeDensity::ArithmeticMean, EdgeDensity::Upwind}) {
    const EdgeFlux f = edge_fluxes(s, d.mesh, d.bc, kind);
    const double pairing = f.J_n.dot(f.dphi_n) + f.J_p.dot(f.dphi_p) + f.J_D.dot(f.dphi_D);
    const double diss = dissipation(s, d.mesh, d.bc, kind);
    CHECK(diss > 0.0);
    CHECK(std::abs(diss - pairing) <= 1e-14 * diss);
  }
}

TEST_CASE("energy report fields") {
  const Device d = testutil::biased_device(20, 1.0);
  const EnergyReport r = energy_report(d.initial, d.mesh, d.bc, d.params);
  CHECK(r.Lambda == doctest::Approx(4.0));
  CHECK(r.mass_D == doctest::Approx(0.5));
  CHECK(r.mass_n == doctest::Approx(1.0));
  CHECK(r.D.min == doctest::Approx(0.5));
  CHECK(r.n.max >= r.n.min);
  CHECK(r.dissipation >= 0.0);
  CHECK(r.n_L53 == doctest::Approx(1.0));
}

TEST_CASE("equilibrium run: every verdict passes within 10 newton_tol") {
  const Device d = testutil::equilibrium_device(32);
  SolverConfig config;
  config.dt = 0.05;
  const auto traj = run_transient(d.initial, Schedule{1.0, {}}, d.mesh, d.bc, d.params, config);
  const auto reports = reports_of(traj);
  InequalityOptions o;
  o.slack = 10 * config.newton_tol;
  const InequalityReport r = check_energy_inequality(reports, 0.0, o);
  CHECK(r.passed);
  CHECK(r.steps.size() == reports.size() - 1);
  CHECK(r.worst_slack >= -o.slack);
  for (const auto& v : r.steps) CHECK(v.asserted);
}

TEST_CASE("single-state trajectory passes vacuously") {
  const Device d = testutil::equilibrium_device(4);
  const InequalityReport r = check_energy_inequality({energy_report(d.initial, d.mesh, d.bc, d.params)}, 0.0);
  CHECK(r.passed);
  CHECK(r.steps.empty());
}

TEST_CASE("energy increase is caught when Lambda = 0") {
  EnergyReport a, b;
  a.t = 0.0;
  a.E = 1.0;
  b.t = 0.1;
  b.E = 1.0 + 1e-6;
  const InequalityReport r = check_energy_inequality({a, b}, 0.0);
  CHECK_FALSE(r.passed);
  CHECK(r.steps[0].slack == doctest::Approx(-1e-6));
}

TEST_CASE("Gronwall form is reported but not asserted for Lambda > 0") {
  EnergyReport a, b;
  a.t = 0.0;
  a.E = 1.0;
  b.t = 1.0;
  b.E = 100.0;
  InequalityOptions o;
  o.c = 1.0;
  o.c1 = 1.0;
  const InequalityReport r = check_energy_inequality({a, b}, 0.5, o);
  CHECK(r.passed);
  REQUIRE(r.steps.size() == 1);
  CHECK_FALSE(r.steps[0].asserted);
  // (1 + 0.5) e^{0.5} - 100
  CHECK(r.steps[0].slack == doctest::Approx(1.5 * std::exp(0.5) - 100.0));
}

TEST_CASE("boundedness monitor") {
  const Device d = testutil::equilibrium_device(8);
  SolverConfig config;
  config.dt = 0.1;
  const auto reports = reports_of(run_transient(d.initial, Schedule{0.5, {}}, d.mesh, d.bc, d.params, config));
  const double initial_max = reports.front().n.max;
  const BoundednessReport ok = boundedness_monitor(reports, 10 * initial_max);
  CHECK(ok.passed);
  CHECK(ok.max_n == doctest::Approx(initial_max).epsilon(1e-12));

  std::vector<EnergyReport> spiked = reports;
  spiked[3].n.max = 100.0;
  const BoundednessReport bad = boundedness_monitor(spiked, 10 * initial_max);
  CHECK_FALSE(bad.passed);
  CHECK(bad.failing_step == 3);
  CHECK(bad.message.find("step 3") != std::string::npos);
  // separate ceilings
  spiked = reports;
  spiked[2].p.max = 5.0;
  CHECK(boundedness_monitor(spiked, 1.5, 10.0).passed);
  CHECK_FALSE(boundedness_monitor(spiked, 10.0, 1.5).passed);
}

TEST_CASE("discrete Poincare constant equals the analytic spectral gap") {
  for (int N : {2, 8, 32, 100}) {
    GeometrySpec g;
    g.cells_x = N;
    g.length = 2.0;
    g.contacts = {{"left", Side::Left}};
    const DeviceMesh mesh = build_mesh(g);
    const double h = 2.0 / N;
    const double mu1 = 4.0 / (h * h) * std::pow(std::sin(std::numbers::pi / (2.0 * N)), 2);
    CHECK(poincare_constant(mesh) == doctest::Approx(1.0 / mu1).epsilon(1e-10));
  }
}

TEST_CASE("Poincare check examples") {
  GeometrySpec g;
  g.cells_x = 32;
  g.contacts = {{"left", Side::Left}};
  const DeviceMesh mesh = build_mesh(g);

  const CellField u = CellField::Constant(32, 0.3);
  const PoincareCheck c = poincare_check(u, mesh, 0.6);
  const double f = -std::log(1 - 0.3), fh = -std::log(1 - 0.6);
  CHECK(c.slack == doctest::Approx(2 * fh * fh - f * f).epsilon(1e-12));
  CHECK(c.slack >= 0.0);

  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    CellField v(32);
    for (int K = 0; K < 32; ++K) v[K] = 0.9 * testutil::uniform(rng);
    const double mean = v.mean();
    const double u_hat = mean + (1 - mean) * (0.05 + 0.9 * testutil::uniform(rng));
    CHECK(poincare_check(v, mesh, u_hat).slack >= 0.0);
  }

  // stress: one cell next to saturation, mean 0.3
  CellField s = CellField::Constant(32, (0.3 * 32 - (1 - 1e-9)) / 31);
  s[10] = 1 - 1e-9;
  const PoincareCheck st = poincare_check(s, mesh, 0.6);
  CHECK(std::isfinite(st.slack));
  CHECK(st.slack > 0.0);

  CHECK_THROWS_AS(poincare_check(u, mesh, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(poincare_check(u, mesh, 1.0), std::invalid_argument);
}

}  // TEST_SUITE
