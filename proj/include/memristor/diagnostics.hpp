#pragma once

#include "memristor/device.hpp"
#include "memristor/discretization.hpp"

#include <string>
#include <vector>

namespace memristor {

struct FieldRange {
  double min = 0.0;
  double max = 0.0;
};

struct EnergyReport {
  double t = 0.0;
  double E = 0.0;
  double dissipation = 0.0;
  double Lambda = 0.0;
  double mass_n = 0.0, mass_p = 0.0, mass_D = 0.0;
  FieldRange n, p, D, V;
  /// Discrete L^{5/3} norms of n and p.
  double n_L53 = 0.0, p_L53 = 0.0;
  /// Monitoring only: discrete W^{1,4} seminorm of V and l^2 norms of the edge fluxes.
  double grad_V_W14 = 0.0;
  double flux_n = 0.0, flux_p = 0.0, flux_D = 0.0;
  /// Energy inequality verdict for the step that produced this state.
  bool inequality_ok = true;
  double inequality_slack = 0.0;
};

/// E = sum_K m_K [G(n|n_bar) + G(p|p_bar) + H(D) + D V_bar] + lambda^2/2 sum_sigma tau |D_sigma(V - V_bar)|^2.
double free_energy(const SystemState& state, const DeviceMesh& mesh, const BoundaryExtension& bc,
                   const ModelParameters& params);

/// sum over species and edges of tau_sigma rho_sigma (D_sigma phi)^2, with the
/// solver's edge density and boundary ghosts.
double dissipation(const SystemState& state, const DeviceMesh& mesh, const BoundaryExtension& bc,
                   EdgeDensity kind = EdgeDensity::ArithmeticMean);

/// Energy, dissipation, masses, extrema and norms of a state. The inequality
/// fields are left at their defaults.
EnergyReport energy_report(const SystemState& state, const DeviceMesh& mesh, const BoundaryExtension& bc,
                           const ModelParameters& params, EdgeDensity kind = EdgeDensity::ArithmeticMean);

struct InequalityOptions {
  /// Allowed excess per step when Lambda = 0.
  double slack = 1e-9;
  /// Gronwall constants for Lambda > 0: E(t) + 1/2 int diss <= (E0 + c Lambda t) exp(c1 Lambda t).
  double c = 0.0;
  double c1 = 0.0;
};

struct InequalityVerdict {
  int step = 0;  // index of the later state
  bool passed = true;
  /// Bound minus observed; negative means violated.
  double slack = 0.0;
  /// False for the Gronwall form, which is reported but not enforced.
  bool asserted = true;
};

struct InequalityReport {
  std::vector<InequalityVerdict> steps;
  /// True when every asserted verdict passed.
  bool passed = true;
  double worst_slack = 0.0;
};

/// Verdict for the step prev -> cur. `first` is the initial report and
/// `dissipation_integral` the rectangle-rule integral of the dissipation up to cur.t.
InequalityVerdict inequality_verdict(const EnergyReport& first, const EnergyReport& prev, const EnergyReport& cur,
                                     double dissipation_integral, double Lambda, const InequalityOptions& options,
                                     int step);

/// Lambda = 0: E_{m+1} + dt_m diss_{m+1}/2 <= E_m + slack for every step.
/// Lambda > 0: the Gronwall bound, reported with asserted = false.
InequalityReport check_energy_inequality(const std::vector<EnergyReport>& reports, double Lambda,
                                         const InequalityOptions& options = {});

struct BoundednessReport {
  bool passed = true;
  /// First step whose sup norm exceeds the ceiling, or -1.
  int failing_step = -1;
  std::vector<double> running_max_n, running_max_p;
  double max_n = 0.0, max_p = 0.0;
  /// Discrete L^inf(0,T; L^{5/3}) norms.
  double n_L53 = 0.0, p_L53 = 0.0;
  std::string message;
};

BoundednessReport boundedness_monitor(const std::vector<EnergyReport>& reports, double ceiling);
/// Separate ceilings for n and p.
BoundednessReport boundedness_monitor(const std::vector<EnergyReport>& reports, double ceiling_n, double ceiling_p);

/// Inverse of the smallest nonzero eigenvalue of the Neumann graph Laplacian,
/// L v = mu M v with M the cell measures. Requires a connected mesh.
double poincare_constant(const DeviceMesh& mesh);

struct PoincareCheck {
  double value = 0.0;  // ||f(u)||_2^2
  double bound = 0.0;
  double slack = 0.0;  // bound - value
};

/// Nonlinear Poincare-Wirtinger check with f(u) = -log(1 - u):
/// ||f(u)||^2 <= 2 m(Omega) f(u_hat)^2 + 4 C_P (1 + u_hat/(u_hat - mean u)) ||grad f(u)||^2.
/// Throws std::invalid_argument unless mean(u) < u_hat < 1 and 0 <= u < 1.
PoincareCheck poincare_check(const CellField& u, const DeviceMesh& mesh, double u_hat);
PoincareCheck poincare_check(const CellField& u, const DeviceMesh& mesh, double u_hat, double C_P);

}  // namespace memristor
