#include "memristor/solver.hpp"
#include "memristor/statistics.hpp"

#include "device_fixtures.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace memristor;
using testutil::Device;

namespace {

double max_diff(const SystemState& a, const SystemState& b) {
  double d = 0.0;
  for (auto f : {&SystemState::n, &SystemState::p, &SystemState::D, &SystemState::V}) {
    d = std::max(d, ((a.*f) - (b.*f)).cwiseAbs().maxCoeff());
  }
  return d;
}

double mass(const CellField& f, const DeviceMesh& mesh) { return mesh.measures().dot(f); }

SystemState run_to(const Device& d, double T, const SolverConfig& config) {
  return run_transient(d.initial, Schedule{T, {}}, d.mesh, d.bc, d.params, config).back().state;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("SolverConfig validation names the field") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.dt = 1.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("solver.dt"), std::invalid_argument);
  c = SolverConfig{};
  c.newton_tol = 0.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("newton_tol"), std::invalid_argument);
  c = SolverConfig{};
  c.damping = 1.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("damping"), std::invalid_argument);
}

TEST_CASE("Poisson: zero data gives zero potential") {
  const Device d = testutil::equilibrium_device(16);
  const CellField n = CellField::Constant(16, 0.7);
  const CellField D = d.params.doping;  // n = p, D = A: zero source
  const CellField V = solve_poisson(n, n, D, d.mesh, d.bc, d.params);
  CHECK(V.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Poisson: discrete harmonic function in 1D is linear") {
  const Device d = testutil::biased_device(20, 3.0);
  const CellField n = CellField::Ones(20);
  const CellField V = solve_poisson(n, n, d.params.doping, d.mesh, d.bc, d.params);
  for (int K = 0; K < 20; ++K) CHECK(V[K] == doctest::Approx(3.0 * d.mesh.cells()[K].centroid.x()).epsilon(1e-12));
}

TEST_CASE("Poisson matches a dense long-double solve") {
  const int m = 64;
  const double lambda = 0.3, U = 1.5;
  GeometrySpec g;
  g.cells_x = m;
  g.contacts = {{"left", Side::Left}, {"right", Side::Right}};
  const DeviceMesh mesh = build_mesh(g);
  ModelParameters params;
  params.lambda = lambda;
  params.doping = Profile::piecewise({0.5}, {0.3, 0.7}).at_cells(mesh);
  const BoundaryExtension bc =
      extend(BoundaryData::from_densities(Profile::constant(1.0), Profile::constant(1.0), Profile::linear(0.0, U)), mesh);
  const CellField n = CellField::Ones(m), D = CellField::Constant(m, 0.5);
  const CellField V = solve_poisson(n, n, D, mesh, bc, params);

  // lambda^2 (V_{i+1} - 2 V_i + V_{i-1}) / h = h (A_i - D_i); half cells to the contacts
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const long double h = 1.0L / m, l2 = static_cast<long double>(lambda) * lambda;
  MatL A = MatL::Zero(m, m);
  VecL b(m);
  for (int i = 0; i < m; ++i) {
    b[i] = -h * (static_cast<long double>(params.doping[i]) - 0.5L);
    for (int j : {i - 1, i + 1}) {
      if (j < 0 || j >= m) {
        const long double tau = 2.0L / h;
        A(i, i) += l2 * tau;
        b[i] += l2 * tau * (j < 0 ? 0.0L : static_cast<long double>(U));
      } else {
        A(i, i) += l2 / h;
        A(i, j) -= l2 / h;
      }
    }
  }
  const VecL ref = A.fullPivLu().solve(b);
  double err = 0.0;
  for (int i = 0; i < m; ++i) err = std::max(err, std::abs(V[i] - static_cast<double>(ref[i])));
  CHECK(err <= 1e-12 * std::max(1.0, static_cast<double>(ref.cwiseAbs().maxCoeff())));
}

TEST_CASE("nonlinear Poisson solve drives its residual to zero") {
  Device d = testutil::biased_device(24, 2.0, 0.2);
  SystemState s = d.initial;
  s.V.setZero();
  const int iters = solve_nonlinear_poisson(s, d.mesh, d.bc, d.params, SolverConfig{});
  CHECK(iters >= 1);
  CHECK(poisson_residual(s.V, s, d.mesh, d.bc, d.params).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("fluxes vanish at equilibrium") {
  const Device d = testutil::equilibrium_device(16);
  const EdgeFlux f = assemble_fluxes(d.initial, d.mesh, d.bc, SolverConfig{});
  CHECK(f.J_n.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(f.J_p.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(f.J_D.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("flux sign: electrons move toward lower chemical potential") {
  GeometrySpec g;
  g.cells_x = 2;
  g.contacts = {{"left", Side::Left}};
  const DeviceMesh mesh = build_mesh(g);
  const BoundaryExtension bc = extend(BoundaryData::equilibrium(0.0, 0.0, Profile()), mesh);
  CellField V(2), phi(2);
  V << 0.1, -0.2;
  phi << 0.0, 1.0;
  SystemState s = make_state(CellField::Ones(2), CellField::Ones(2), CellField::Constant(2, 0.5), V, 0.0);
  s.phi_n = phi;
  sync_densities(s);
  CHECK(s.n[0] == doctest::Approx(fd_half(0.0 + V[0])));
  CHECK(s.n[1] == doctest::Approx(fd_half(1.0 + V[1])));
  const EdgeFlux f = assemble_fluxes(s, mesh, bc, SolverConfig{});
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edges()[e];
    if (edge.is_boundary()) continue;
    // positive means cell -> neighbor; here the neighbor has the higher phi_n
    const double towards_lower = edge.cell == 0 ? -f.J_n[e] : f.J_n[e];
    CHECK(towards_lower > 0.0);
  }
  // no carrier flux through the insulating end, no vacancy flux through any boundary
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edges()[e];
    if (edge.is_boundary()) CHECK(f.J_D[e] == 0.0);
    if (edge.tag == BoundaryTag::NeumannInsulating) {
      CHECK(f.J_n[e] == 0.0);
      CHECK(f.J_p[e] == 0.0);
    }
  }
}

TEST_CASE("flux assembly matches a brute-force cell loop on a biased step") {
  const int m = 32;
  const double U = 2.0;
  const Device d = testutil::biased_device(m, U);
  const SolverConfig config = testutil::fixed_step(0.01);
  const SystemState s = advance(d.initial, 0.01, d.mesh, d.bc, d.params, config);
  const EdgeFlux f = assemble_fluxes(s, d.mesh, d.bc, config);

  // independent scalar evaluation: cells i and i+1 of a uniform interval,
  // ghosts from the boundary data formulas rather than the extension
  const double h = 1.0 / m;
  auto flux = [](double tau, double rk, double rl, double dphi) { return tau * 0.5 * (rk + rl) * dphi; };
  const double ghost_n[2] = {inverse_fd_half(1.0) - 0.0, inverse_fd_half(1.0) - U};
  const double ghost_p[2] = {inverse_fd_half(1.0) + 0.0, inverse_fd_half(1.0) + U};
  double worst = 0.0, scale = 0.0;
  for (int e = 0; e < d.mesh.num_edges(); ++e) {
    const Edge& edge = d.mesh.edges()[e];
    const int i = edge.cell;
    double jn, jp, jd;
    if (!edge.is_boundary()) {
      const int j = edge.neighbor;
      REQUIRE(j == i + 1);
      jn = flux(1.0 / h, s.n[i], s.n[j], s.phi_n[i] - s.phi_n[j]);
      jp = flux(1.0 / h, s.p[i], s.p[j], s.phi_p[i] - s.phi_p[j]);
      jd = flux(1.0 / h, s.D[i], s.D[j], s.phi_D[i] - s.phi_D[j]);
    } else {
      const int side = i == 0 ? 0 : 1;
      jn = flux(2.0 / h, s.n[i], 1.0, s.phi_n[i] - ghost_n[side]);
      jp = flux(2.0 / h, s.p[i], 1.0, s.phi_p[i] - ghost_p[side]);
      jd = 0.0;
    }
    worst = std::max({worst, std::abs(jn - f.J_n[e]), std::abs(jp - f.J_p[e]), std::abs(jd - f.J_D[e])});
    scale = std::max({scale, std::abs(jn), std::abs(jp), std::abs(jd)});
  }
  CHECK(scale > 0.1);
  CHECK(worst <= 1e-12 * scale);
}

TEST_CASE("saturation breach is rejected") {
  Device d = testutil::equilibrium_device(4);
  SystemState s = d.initial;
  s.D[2] = 1.0 - 1e-14;
  CHECK_THROWS_AS(assemble_fluxes(s, d.mesh, d.bc, SolverConfig{}), StepRejected);
}

TEST_CASE("transport Jacobian matches finite differences") {
  const int m = 8;
  std::mt19937_64 rng(11);
  GeometrySpec g;
  g.cells_x = m;
  g.contacts = {{"left", Side::Left}, {"right", Side::Right}};
  const DeviceMesh mesh = build_mesh(g);
  const BoundaryExtension bc =
      extend(BoundaryData::from_densities(Profile::constant(0.7), Profile::constant(1.4), Profile::linear(0.2, 1.0)), mesh);
  for (Species sp : {Species::Electrons, Species::Holes, Species::Vacancies}) {
    for (EdgeDensity kind : {EdgeDensity::ArithmeticMean, EdgeDensity::Upwind}) {
      for (int trial = 0; trial < 5; ++trial) {
        CellField V(m), old(m), phi(m);
        for (int i = 0; i < m; ++i) {
          V[i] = 2 * testutil::uniform(rng) - 1;
          old[i] = sp == Species::Vacancies ? 0.9 * testutil::uniform(rng) + 0.05 : 2 * testutil::uniform(rng) + 0.1;
          phi[i] = 3 * testutil::uniform(rng) - 1.5;
        }
        const TransportSystem sys(sp, mesh, bc, V, old, 0.05, kind);
        const Eigen::MatrixXd J = Eigen::MatrixXd(sys.jacobian(phi));
        Eigen::MatrixXd fd(m, m);
        for (int c = 0; c < m; ++c) {
          const double h = 1e-6;
          CellField a = phi, b = phi;
          a[c] += h;
          b[c] -= h;
          fd.col(c) = (sys.residual(a) - sys.residual(b)) / (2 * h);
        }
        CHECK((J - fd).norm() <= 1e-5 * J.norm());
      }
    }
  }
}

TEST_CASE("transport density matches the statistics maps") {
  const Device d = testutil::equilibrium_device(4);
  CellField phi(4);
  phi << -1.0, 0.0, 0.5, 2.0;
  const CellField V = d.initial.V;
  const TransportSystem n_sys(Species::Electrons, d.mesh, d.bc, V, d.initial.n, 0.1, EdgeDensity::ArithmeticMean);
  const TransportSystem p_sys(Species::Holes, d.mesh, d.bc, V, d.initial.p, 0.1, EdgeDensity::ArithmeticMean);
  const TransportSystem D_sys(Species::Vacancies, d.mesh, d.bc, V, d.initial.D, 0.1, EdgeDensity::ArithmeticMean);
  for (int K = 0; K < 4; ++K) {
    CHECK(n_sys.density(phi)[K] == doctest::Approx(fd_half(phi[K] + V[K])));
    CHECK(p_sys.density(phi)[K] == doctest::Approx(fd_half(phi[K] - V[K])));
    CHECK(D_sys.density(phi)[K] == doctest::Approx(blakemore(phi[K] - V[K])));
    CHECK(n_sys.density_derivative(phi)[K] == doctest::Approx(fd_minus_half(phi[K] + V[K])));
  }
}

TEST_CASE("equilibrium is a fixed point of advance") {
  const Device d = testutil::equilibrium_device(32);
  SolverConfig config = testutil::fixed_step(0.1);
  StepReport report;
  const SystemState next = advance(d.initial, 0.1, d.mesh, d.bc, d.params, config, &report);
  CHECK(max_diff(next, d.initial) <= 10 * config.newton_tol);
  CHECK(report.residual < config.newton_tol);
  CHECK(next.t == doctest::Approx(0.1));
}

TEST_CASE("advance conserves vacancy mass and keeps densities admissible") {
  Device d = testutil::biased_device(32, 4.0, 0.5);
  const SolverConfig config = testutil::fixed_step(0.02);
  const double m0 = mass(d.initial.D, d.mesh);
  SystemState s = d.initial;
  for (int step = 0; step < 10; ++step) {
    s = advance(s, 0.02, d.mesh, d.bc, d.params, config);
    CHECK(std::abs(mass(s.D, d.mesh) - m0) / m0 <= 1e-12);
    CHECK(s.n.minCoeff() >= 0.0);
    CHECK(s.p.minCoeff() >= 0.0);
    CHECK(s.D.minCoeff() >= 0.0);
    CHECK(s.D.maxCoeff() <= 1.0 - config.saturation_eps);
    CHECK(statistics_consistency(s) <= 1e-9);
  }
  // the bias actually moved the vacancies
  CHECK((s.D - d.initial.D).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("backward Euler is first order in time") {
  const Device d = testutil::biased_device(16, 2.0);
  const double dt = 0.02, T = 10 * dt;
  const SystemState a = run_to(d, T, testutil::fixed_step(dt));
  const SystemState b = run_to(d, T, testutil::fixed_step(dt / 2));
  const SystemState c = run_to(d, T, testutil::fixed_step(dt / 4));
  const double order = std::log2(max_diff(a, b) / max_diff(b, c));
  CHECK(order >= 0.8);
  CHECK(order <= 1.2);
}

TEST_CASE("run_transient with T = 0 returns the initial state") {
  const Device d = testutil::equilibrium_device(8);
  const auto traj = run_transient(d.initial, Schedule{0.0, {}}, d.mesh, d.bc, d.params, SolverConfig{});
  REQUIRE(traj.size() == 1);
  CHECK(max_diff(traj[0].state, d.initial) == 0.0);
}

TEST_CASE("run_transient grows easy steps and hits stops exactly") {
  const Device d = testutil::equilibrium_device(8);
  SolverConfig config;
  config.dt = 0.01;
  config.dt_max = 0.05;
  const auto traj = run_transient(d.initial, Schedule{0.5, {0.123}}, d.mesh, d.bc, d.params, config);
  CHECK(traj.back().state.t == 0.5);
  bool hit = false;
  double biggest = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    hit = hit || traj[i].state.t == 0.123;
    biggest = std::max(biggest, traj[i].dt);
    CHECK(traj[i].dt <= config.dt_max * (1 + 1e-12));
  }
  CHECK(hit);
  CHECK(traj[1].dt == doctest::Approx(0.01));
  CHECK(traj[2].dt == doctest::Approx(0.012));
  CHECK(biggest == doctest::Approx(0.05));
}

TEST_CASE("run_transient is deterministic") {
  const Device d = testutil::biased_device(24, 3.0);
  SolverConfig config;
  config.dt = 0.01;
  const auto a = run_transient(d.initial, Schedule{0.2, {}}, d.mesh, d.bc, d.params, config);
  const auto b = run_transient(d.initial, Schedule{0.2, {}}, d.mesh, d.bc, d.params, config);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(max_diff(a[i].state, b[i].state) == 0.0);
    CHECK(a[i].energy.E == b[i].energy.E);
  }
}

TEST_CASE("NonConvergence propagates once dt_min is reached") {
  const Device d = testutil::biased_device(32, 60.0, 0.05);
  SolverConfig config = testutil::fixed_step(10.0);
  config.gummel_max_iter = 4;
  CHECK_THROWS_AS(run_transient(d.initial, Schedule{10.0, {}}, d.mesh, d.bc, d.params, config), NonConvergence);
}

}  // TEST_SUITE
