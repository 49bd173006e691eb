#include "memristor/solver.hpp"

#include "memristor/statistics.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace memristor {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

// lambda^2 times the two-point Laplacian with Dirichlet ghosts folded into the
// diagonal, plus the matching right-hand-side contribution of V_bar.
void assemble_laplacian(const DeviceMesh& mesh, const BoundaryExtension& bc, double lambda2, Triplets& t,
                        CellField& rhs) {
  rhs.setZero(mesh.num_cells());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edges()[static_cast<std::size_t>(e)];
    const double w = lambda2 * edge.transmissibility();
    const int K = edge.cell;
    if (!edge.is_boundary()) {
      const int L = edge.neighbor;
      t.emplace_back(K, K, w);
      t.emplace_back(L, L, w);
      t.emplace_back(K, L, -w);
      t.emplace_back(L, K, -w);
    } else if (edge.is_dirichlet()) {
      t.emplace_back(K, K, w);
      rhs[K] += w * bc.edge_V[e];
    }
  }
}

double inf_norm(const CellField& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

std::string species_name(Species s) {
  switch (s) {
    case Species::Electrons: return "electrons";
    case Species::Holes: return "holes";
    case Species::Vacancies: return "vacancies";
  }
  return "?";
}

// Change of a chemical potential weighted by the density it controls, so that
// cells in vacuum, where phi is poorly determined, do not stall the loop.
double weighted_change(const CellField& before, const CellField& after, const CellField& rho) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < before.size(); ++i) {
    worst = std::max(worst, std::abs(after[i] - before[i]) * std::min(1.0, rho[i]));
  }
  return worst;
}

}  // namespace

void SolverConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string("solver.") + name + " must be positive");
  };
  positive(dt, "dt");
  positive(dt_min, "dt_min");
  positive(dt_max, "dt_max");
  positive(newton_tol, "newton_tol");
  positive(gummel_tol, "gummel_tol");
  positive(saturation_eps, "saturation_eps");
  if (!(dt_min <= dt && dt <= dt_max)) throw std::invalid_argument("solver.dt must satisfy dt_min <= dt <= dt_max");
  if (newton_max_iter < 1) throw std::invalid_argument("solver.newton_max_iter must be >= 1");
  if (gummel_max_iter < 1) throw std::invalid_argument("solver.gummel_max_iter must be >= 1");
  if (!(damping > 0.0 && damping < 1.0)) throw std::invalid_argument("solver.damping must lie in (0, 1)");
  if (!(saturation_eps < 0.5)) throw std::invalid_argument("solver.saturation_eps must be < 1/2");
  if (!(dt_growth >= 1.0)) throw std::invalid_argument("solver.dt_growth must be >= 1");
}

CellField solve_poisson(const CellField& n, const CellField& p, const CellField& D, const DeviceMesh& mesh,
                        const BoundaryExtension& bc, const ModelParameters& params) {
  params.validate(mesh);
  const int m = mesh.num_cells();
  Triplets t;
  CellField rhs;
  assemble_laplacian(mesh, bc, params.lambda * params.lambda, t, rhs);
  SparseMatrix A(m, m);
  A.setFromTriplets(t.begin(), t.end());
  const CellField measure = mesh.measures();
  rhs -= measure.cwiseProduct(n - p - D + params.doping);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("solve_poisson: singular system (no Dirichlet contact?)");
  }
  return ldlt.solve(rhs);
}

EdgeFlux assemble_fluxes(const SystemState& state, const DeviceMesh& mesh, const BoundaryExtension& bc,
                         const SolverConfig& config) {
  for (Eigen::Index i = 0; i < state.D.size(); ++i) {
    if (state.D[i] >= 1.0 - 0.5 * config.saturation_eps) {
      std::ostringstream msg;
      msg << "vacancy saturation breach in cell " << i << " (D = " << state.D[i] << ")";
      throw StepRejected(msg.str());
    }
  }
  return edge_fluxes(state, mesh, bc, config.edge_density);
}

// ---------------------------------------------------------------------------
// Nonlinear Poisson

CellField poisson_residual(const CellField& V, const SystemState& s, const DeviceMesh& mesh,
                           const BoundaryExtension& bc, const ModelParameters& params) {
  const double lambda2 = params.lambda * params.lambda;
  CellField r(mesh.num_cells());
  for (int K = 0; K < mesh.num_cells(); ++K) {
    const double charge = fd_half(s.phi_n[K] + V[K]) - fd_half(s.phi_p[K] - V[K]) - blakemore(s.phi_D[K] - V[K]) +
                          params.doping[K];
    r[K] = mesh.cells()[static_cast<std::size_t>(K)].measure * charge;
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edges()[static_cast<std::size_t>(e)];
    const double w = lambda2 * edge.transmissibility();
    const int K = edge.cell;
    if (!edge.is_boundary()) {
      const double flow = w * (V[K] - V[edge.neighbor]);
      r[K] += flow;
      r[edge.neighbor] -= flow;
    } else if (edge.is_dirichlet()) {
      r[K] += w * (V[K] - bc.edge_V[e]);
    }
  }
  return r.cwiseQuotient(mesh.measures());
}

int solve_nonlinear_poisson(SystemState& s, const DeviceMesh& mesh, const BoundaryExtension& bc,
                            const ModelParameters& params, const SolverConfig& config) {
  const int m = mesh.num_cells();
  const CellField measure = mesh.measures();
  Triplets lap;
  CellField unused;
  assemble_laplacian(mesh, bc, params.lambda * params.lambda, lap, unused);

  CellField r = poisson_residual(s.V, s, mesh, bc, params);
  double norm = inf_norm(r);
  int it = 0;
  while (norm > config.newton_tol) {
    if (it >= config.newton_max_iter) {
      throw NonConvergence("Poisson Newton did not converge (residual " + std::to_string(norm) + ")");
    }
    ++it;
    Triplets t = lap;
    for (int K = 0; K < m; ++K) {
      const double dcharge = fd_minus_half(s.phi_n[K] + s.V[K]) + fd_minus_half(s.phi_p[K] - s.V[K]) +
                             blakemore(s.phi_D[K] - s.V[K]) * blakemore_complement(s.phi_D[K] - s.V[K]);
      t.emplace_back(K, K, measure[K] * dcharge);
    }
    SparseMatrix J(m, m);
    J.setFromTriplets(t.begin(), t.end());
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(J);
    if (ldlt.info() != Eigen::Success) throw NonConvergence("Poisson Jacobian factorization failed");
    const CellField delta = ldlt.solve(-measure.cwiseProduct(r));
    double step = 1.0;
    for (;;) {
      const CellField trial = s.V + step * delta;
      const CellField r_trial = poisson_residual(trial, s, mesh, bc, params);
      const double n_trial = inf_norm(r_trial);
      if (std::isfinite(n_trial) && (n_trial < norm || n_trial <= config.newton_tol)) {
        s.V = trial;
        r = r_trial;
        norm = n_trial;
        break;
      }
      step *= config.damping;
      if (step < 1e-8) throw NonConvergence("Poisson line search failed");
    }
  }
  return it;
}

// ---------------------------------------------------------------------------
// Transport

TransportSystem::TransportSystem(Species species, const DeviceMesh& mesh, const BoundaryExtension& bc, CellField V,
                                 CellField rho_old, double dt, EdgeDensity kind)
    : species_(species), mesh_(mesh), bc_(bc), V_(std::move(V)), rho_old_(std::move(rho_old)), dt_(dt), kind_(kind) {}

double TransportSystem::rho(double phi, int K) const {
  switch (species_) {
    case Species::Electrons: return fd_half(phi + V_[K]);
    case Species::Holes: return fd_half(phi - V_[K]);
    case Species::Vacancies: return blakemore(phi - V_[K]);
  }
  return 0.0;
}

double TransportSystem::rho_prime(double phi, int K) const {
  switch (species_) {
    case Species::Electrons: return fd_minus_half(phi + V_[K]);
    case Species::Holes: return fd_minus_half(phi - V_[K]);
    case Species::Vacancies: return blakemore(phi - V_[K]) * blakemore_complement(phi - V_[K]);
  }
  return 0.0;
}

CellField TransportSystem::density(const CellField& phi) const {
  CellField r(phi.size());
  for (int K = 0; K < phi.size(); ++K) r[K] = rho(phi[K], K);
  return r;
}

CellField TransportSystem::density_derivative(const CellField& phi) const {
  CellField r(phi.size());
  for (int K = 0; K < phi.size(); ++K) r[K] = rho_prime(phi[K], K);
  return r;
}

CellField TransportSystem::residual(const CellField& phi) const {
  const CellField rho_now = density(phi);
  CellField flow = CellField::Zero(phi.size());  // sum_sigma tau a (phi_K - phi_L)
  for (int e = 0; e < mesh_.num_edges(); ++e) {
    const Edge& edge = mesh_.edges()[static_cast<std::size_t>(e)];
    const int K = edge.cell;
    const double tau = edge.transmissibility();
    if (!edge.is_boundary()) {
      const int L = edge.neighbor;
      const double d = phi[K] - phi[L];
      const double j = tau * edge_density(rho_now[K], rho_now[L], d, kind_) * d;
      flow[K] += j;
      flow[L] -= j;
    } else if (edge.is_dirichlet() && species_ != Species::Vacancies) {
      const bool electrons = species_ == Species::Electrons;
      const double ghost = electrons ? bc_.edge_phi_n[e] : bc_.edge_phi_p[e];
      const double rho_bar = electrons ? bc_.edge_n[e] : bc_.edge_p[e];
      const double d = phi[K] - ghost;
      flow[K] += tau * edge_density(rho_now[K], rho_bar, d, kind_) * d;
    }
  }
  return rho_now - rho_old_ + dt_ * flow.cwiseQuotient(mesh_.measures());
}

Eigen::SparseMatrix<double> TransportSystem::jacobian(const CellField& phi) const {
  const int m = static_cast<int>(phi.size());
  const CellField rho_now = density(phi);
  const CellField drho = density_derivative(phi);
  const CellField measure = mesh_.measures();
  Triplets t;
  for (int K = 0; K < m; ++K) t.emplace_back(K, K, drho[K]);
  // d a / d rho_cell and d a / d rho_neighbor
  auto weights = [this](double d) -> std::pair<double, double> {
    if (kind_ == EdgeDensity::ArithmeticMean) return {0.5, 0.5};
    return d >= 0.0 ? std::pair{1.0, 0.0} : std::pair{0.0, 1.0};
  };
  for (int e = 0; e < mesh_.num_edges(); ++e) {
    const Edge& edge = mesh_.edges()[static_cast<std::size_t>(e)];
    const int K = edge.cell;
    const double tau = edge.transmissibility();
    if (!edge.is_boundary()) {
      const int L = edge.neighbor;
      const double d = phi[K] - phi[L];
      const double a = edge_density(rho_now[K], rho_now[L], d, kind_);
      const auto [wK, wL] = weights(d);
      // j = tau a d; dj/dphi_K = tau (a + wK rho'_K d), dj/dphi_L = tau (-a + wL rho'_L d)
      const double djK = tau * (a + wK * drho[K] * d);
      const double djL = tau * (-a + wL * drho[L] * d);
      t.emplace_back(K, K, dt_ * djK / measure[K]);
      t.emplace_back(K, L, dt_ * djL / measure[K]);
      t.emplace_back(L, K, -dt_ * djK / measure[L]);
      t.emplace_back(L, L, -dt_ * djL / measure[L]);
    } else if (edge.is_dirichlet() && species_ != Species::Vacancies) {
      const bool electrons = species_ == Species::Electrons;
      const double ghost = electrons ? bc_.edge_phi_n[e] : bc_.edge_phi_p[e];
      const double rho_bar = electrons ? bc_.edge_n[e] : bc_.edge_p[e];
      const double d = phi[K] - ghost;
      const double a = edge_density(rho_now[K], rho_bar, d, kind_);
      const double wK = weights(d).first;
      t.emplace_back(K, K, dt_ * tau * (a + wK * drho[K] * d) / measure[K]);
    }
  }
  SparseMatrix J(m, m);
  J.setFromTriplets(t.begin(), t.end());
  return J;
}

int TransportSystem::solve(CellField& phi, const SolverConfig& config) const {
  CellField r = residual(phi);
  double norm = inf_norm(r);
  int it = 0;
  int polish = 0;
  Eigen::SparseLU<SparseMatrix> lu;
  for (;;) {
    if (norm <= config.newton_tol) {
      // A few extra full steps drive the residual to roundoff, which keeps the
      // vacancy mass conserved over long runs rather than to newton_tol per step.
      if (polish >= 2 || norm <= 1e-15 * std::max(1.0, inf_norm(rho_old_))) break;
      ++polish;
    } else if (it >= config.newton_max_iter) {
      throw NonConvergence("Newton for " + species_name(species_) + " did not converge (residual " +
                           std::to_string(norm) + ")");
    }
    ++it;
    const SparseMatrix J = jacobian(phi);
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw NonConvergence("Jacobian factorization failed for " + species_name(species_));
    CellField delta = lu.solve(-r);
    if (!delta.allFinite()) throw NonConvergence("non-finite Newton update for " + species_name(species_));
    // Chemical potentials enter exponentially; cap the raw step.
    const double cap = 10.0;
    const double big = inf_norm(delta);
    if (big > cap) delta *= cap / big;

    double step = 1.0;
    bool accepted = false;
    while (step >= 1e-10) {
      const CellField trial = phi + step * delta;
      const CellField r_trial = residual(trial);
      const double n_trial = inf_norm(r_trial);
      if (std::isfinite(n_trial) && n_trial < norm) {
        phi = trial;
        r = r_trial;
        norm = n_trial;
        accepted = true;
        break;
      }
      if (norm <= config.newton_tol) break;  // polishing: do not damp, just stop
      step *= config.damping;
    }
    if (!accepted) {
      if (norm <= config.newton_tol) break;
      throw NonConvergence("line search failed for " + species_name(species_));
    }
  }
  return it;
}

// ---------------------------------------------------------------------------
// Time stepping

SystemState advance(const SystemState& state, double dt, const DeviceMesh& mesh, const BoundaryExtension& bc,
                    const ModelParameters& params, const SolverConfig& config, StepReport* report) {
  if (!(dt > 0.0)) throw std::invalid_argument("advance: dt must be positive");
  SystemState s = state;
  s.t = state.t + dt;
  StepReport local;
  bool converged = false;
  for (int g = 1; g <= config.gummel_max_iter && !converged; ++g) {
    local.gummel_iters = g;
    const SystemState before = s;
    local.newton_iters += solve_nonlinear_poisson(s, mesh, bc, params, config);
    const std::array<std::pair<Species, CellField*>, 3> unknowns{
        {{Species::Electrons, &s.phi_n}, {Species::Holes, &s.phi_p}, {Species::Vacancies, &s.phi_D}}};
    const std::array<const CellField*, 3> old{&state.n, &state.p, &state.D};
    for (std::size_t i = 0; i < 3; ++i) {
      TransportSystem system(unknowns[i].first, mesh, bc, s.V, *old[i], dt, config.edge_density);
      local.newton_iters += system.solve(*unknowns[i].second, config);
    }
    sync_densities(s);
    const double change = std::max({inf_norm(s.V - before.V), weighted_change(before.phi_n, s.phi_n, s.n),
                                    weighted_change(before.phi_p, s.phi_p, s.p),
                                    weighted_change(before.phi_D, s.phi_D, s.D)});
    converged = change <= config.gummel_tol;
  }
  if (!converged) {
    throw NonConvergence("Gummel iteration did not converge in " + std::to_string(config.gummel_max_iter) +
                         " iterations");
  }
  if (!s.n.allFinite() || !s.p.allFinite() || !s.D.allFinite() || !s.V.allFinite()) {
    throw NonConvergence("non-finite state after step");
  }
  const double d_max = s.D.maxCoeff();
  if (d_max > 1.0 - config.saturation_eps) {
    std::ostringstream msg;
    msg << "vacancy density reached " << d_max << " > 1 - saturation_eps";
    throw StepRejected(msg.str());
  }
  // Final residuals: Poisson with the final potentials, and the three transports.
  local.residual = inf_norm(poisson_residual(s.V, s, mesh, bc, params));
  const std::array<std::pair<Species, const CellField*>, 3> finals{
      {{Species::Electrons, &s.phi_n}, {Species::Holes, &s.phi_p}, {Species::Vacancies, &s.phi_D}}};
  const std::array<const CellField*, 3> old{&state.n, &state.p, &state.D};
  for (std::size_t i = 0; i < 3; ++i) {
    TransportSystem system(finals[i].first, mesh, bc, s.V, *old[i], dt, config.edge_density);
    local.residual = std::max(local.residual, inf_norm(system.residual(*finals[i].second)));
  }
  if (report) *report = local;
  return s;
}

std::vector<TrajectoryPoint> run_transient(const SystemState& initial, const Schedule& schedule,
                                           const DeviceMesh& mesh, const BoundaryProvider& boundary,
                                           const ModelParameters& params, const SolverConfig& config,
                                           const TransientOptions& options) {
  config.validate();
  const double T = schedule.final_time;
  if (!(T >= initial.t)) throw std::invalid_argument("run_transient: final time precedes the initial state");
  std::vector<double> stops;
  for (double s : schedule.stops) {
    if (s > initial.t && s < T) stops.push_back(s);
  }
  stops.push_back(T);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  const double t_eps = 1e-12 * std::max(1.0, std::abs(T));

  std::vector<TrajectoryPoint> trajectory;
  TrajectoryPoint current;
  current.state = initial;
  {
    const BoundaryExtension& bc = boundary(initial.t);
    current.energy = energy_report(initial, mesh, bc, params, config.edge_density);
  }
  const EnergyReport first = current.energy;
  if (options.observer) options.observer(current);
  trajectory.push_back(current);

  double dt = config.dt;
  double diss_integral = 0.0;
  std::size_t next = 0;
  int step = 0;
  while (current.state.t < T - t_eps) {
    while (next < stops.size() && stops[next] <= current.state.t + t_eps) ++next;
    const double target = next < stops.size() ? stops[next] : T;
    double h = std::min(dt, target - current.state.t);
    const bool lands = h >= target - current.state.t - t_eps;
    const BoundaryExtension& bc = boundary(current.state.t + h);
    TrajectoryPoint point;
    try {
      point.state = advance(current.state, h, mesh, bc, params, config, &point.step);
    } catch (const NonConvergence&) {
      if (0.5 * h < config.dt_min) throw;
      dt = 0.5 * h;
      continue;
    } catch (const StepRejected&) {
      if (0.5 * h < config.dt_min) throw;
      dt = 0.5 * h;
      continue;
    }
    if (lands) point.state.t = target;  // remove accumulated roundoff at stops
    ++step;
    point.dt = h;
    point.energy = energy_report(point.state, mesh, bc, params, config.edge_density);
    diss_integral += h * point.energy.dissipation;
    const InequalityVerdict verdict =
        inequality_verdict(first, current.energy, point.energy, diss_integral, point.energy.Lambda,
                           options.inequality, step);
    point.energy.inequality_ok = verdict.passed;
    point.energy.inequality_slack = verdict.slack;
    if (options.observer) options.observer(point);
    if (!options.keep_states && trajectory.size() > 1) trajectory.back().state = SystemState{};
    trajectory.push_back(point);
    current = std::move(point);
    if (current.step.gummel_iters <= config.easy_gummel_iters) dt = std::min(dt * config.dt_growth, config.dt_max);
  }
  return trajectory;
}

std::vector<TrajectoryPoint> run_transient(const SystemState& initial, const Schedule& schedule,
                                           const DeviceMesh& mesh, const BoundaryExtension& bc,
                                           const ModelParameters& params, const SolverConfig& config,
                                           const TransientOptions& options) {
  return run_transient(
      initial, schedule, mesh, [&bc](double) -> const BoundaryExtension& { return bc; }, params, config, options);
}

}  // namespace memristor
