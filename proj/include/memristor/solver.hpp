#pragma once

#include "memristor/device.hpp"
#include "memristor/diagnostics.hpp"
#include "memristor/discretization.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace memristor {

struct SolverConfig {
  double dt = 1e-3;
  double dt_min = 1e-8;
  double dt_max = 1e-1;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  double gummel_tol = 1e-9;
  int gummel_max_iter = 100;
  double damping = 0.5;
  double saturation_eps = 1e-12;
  EdgeDensity edge_density = EdgeDensity::ArithmeticMean;
  /// Step growth factor after an easy step, and the Gummel count that counts as easy.
  double dt_growth = 1.2;
  int easy_gummel_iters = 5;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a step cannot be accepted even at dt_min.
class StepRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Species { Electrons, Holes, Vacancies };

/// Linear Poisson problem lambda^2 Delta V = n - p - D + A with V = V_bar on contacts.
CellField solve_poisson(const CellField& n, const CellField& p, const CellField& D, const DeviceMesh& mesh,
                        const BoundaryExtension& bc, const ModelParameters& params);

/// edge_fluxes with the configured edge density; throws StepRejected if some
/// D reaches 1 - saturation_eps/2.
EdgeFlux assemble_fluxes(const SystemState& state, const DeviceMesh& mesh, const BoundaryExtension& bc,
                         const SolverConfig& config);

/// Backward-Euler residual of one continuity equation in the chemical potential,
/// with V frozen: r_K = rho_K(phi) - rho_K^old - dt/m_K sum_sigma tau rho_sigma (phi_L - phi_K).
class TransportSystem {
 public:
  TransportSystem(Species species, const DeviceMesh& mesh, const BoundaryExtension& bc, CellField V,
                  CellField rho_old, double dt, EdgeDensity kind);

  CellField density(const CellField& phi) const;
  CellField density_derivative(const CellField& phi) const;
  CellField residual(const CellField& phi) const;
  Eigen::SparseMatrix<double> jacobian(const CellField& phi) const;

  /// Damped Newton solve; returns the iteration count, throws NonConvergence.
  int solve(CellField& phi, const SolverConfig& config) const;

 private:
  double rho(double phi, int cell) const;
  double rho_prime(double phi, int cell) const;

  Species species_;
  const DeviceMesh& mesh_;
  const BoundaryExtension& bc_;
  CellField V_;
  CellField rho_old_;
  double dt_;
  EdgeDensity kind_;
};

/// Nonlinear Poisson residual (scaled by cell measure) for V with the chemical
/// potentials frozen, and its Newton solve.
CellField poisson_residual(const CellField& V, const SystemState& state, const DeviceMesh& mesh,
                           const BoundaryExtension& bc, const ModelParameters& params);
int solve_nonlinear_poisson(SystemState& state, const DeviceMesh& mesh, const BoundaryExtension& bc,
                            const ModelParameters& params, const SolverConfig& config);

struct StepReport {
  int gummel_iters = 0;
  int newton_iters = 0;
  /// Largest final residual over the Poisson and transport solves.
  double residual = 0.0;
};

/// One implicit step of size dt. Throws NonConvergence or StepRejected.
SystemState advance(const SystemState& state, double dt, const DeviceMesh& mesh, const BoundaryExtension& bc,
                    const ModelParameters& params, const SolverConfig& config, StepReport* report = nullptr);

struct TrajectoryPoint {
  SystemState state;
  StepReport step;
  double dt = 0.0;
  EnergyReport energy;
};

struct Schedule {
  double final_time = 1.0;
  /// Times the step size is clipped to hit exactly; final_time is always one.
  std::vector<double> stops;
};

/// Boundary data as a function of time. The returned reference must stay valid
/// until the next call.
using BoundaryProvider = std::function<const BoundaryExtension&(double t)>;

/// Called after every accepted step (and once for the initial state).
using StepObserver = std::function<void(const TrajectoryPoint&)>;

struct TransientOptions {
  StepObserver observer;
  /// When false only the last state is kept in the returned trajectory.
  bool keep_states = true;
  InequalityOptions inequality;
};

/// Adaptive time stepping: a failed step is retried with half the step size;
/// once that would drop below dt_min the failure (NonConvergence or
/// StepRejected) propagates. A step needing at most easy_gummel_iters Gummel
/// iterations grows dt by dt_growth, up to dt_max. Every point carries its
/// energy report with the per-step inequality verdict.
std::vector<TrajectoryPoint> run_transient(const SystemState& initial, const Schedule& schedule,
                                           const DeviceMesh& mesh, const BoundaryProvider& boundary,
                                           const ModelParameters& params, const SolverConfig& config,
                                           const TransientOptions& options = {});

std::vector<TrajectoryPoint> run_transient(const SystemState& initial, const Schedule& schedule,
                                           const DeviceMesh& mesh, const BoundaryExtension& bc,
                                           const ModelParameters& params, const SolverConfig& config,
                                           const TransientOptions& options = {});

}  // namespace memristor
