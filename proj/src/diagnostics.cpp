#include "memristor/diagnostics.hpp"

#include "memristor/statistics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace memristor {

namespace {

// s log s + (1-s) log(1-s) + log 2 with 0 log 0 = 0.
double vacancy_entropy(double s) {
  auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
  return xlogx(s) + xlogx(1.0 - s) + std::numbers::ln2;
}

FieldRange range_of(const CellField& f) { return {f.minCoeff(), f.maxCoeff()}; }

double lp_norm(const CellField& f, const CellField& measure, double p) {
  return std::pow(measure.dot(f.cwiseAbs().array().pow(p).matrix()), 1.0 / p);
}

}  // namespace

double free_energy(const SystemState& s, const DeviceMesh& mesh, const BoundaryExtension& bc,
                   const ModelParameters& params) {
  double bulk = 0.0;
  for (int K = 0; K < mesh.num_cells(); ++K) {
    const double density_terms = relative_energy_from_potentials(s.phi_n[K] + s.V[K], bc.y_n_bar[K]) +
                                 relative_energy_from_potentials(s.phi_p[K] - s.V[K], bc.y_p_bar[K]) +
                                 vacancy_entropy(s.D[K]) + s.D[K] * bc.V_bar[K];
    bulk += mesh.cells()[static_cast<std::size_t>(K)].measure * density_terms;
  }
  // lambda^2/2 |grad(V - V_bar)|^2; on contacts V - V_bar vanishes at the trace.
  double field = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edges()[static_cast<std::size_t>(e)];
    const int K = edge.cell;
    double jump;
    if (!edge.is_boundary()) {
      jump = (s.V[K] - bc.V_bar[K]) - (s.V[edge.neighbor] - bc.V_bar[edge.neighbor]);
    } else if (edge.is_dirichlet()) {
      jump = s.V[K] - bc.V_bar[K];
    } else {
      continue;
    }
    field += edge.transmissibility() * jump * jump;
  }
  return bulk + 0.5 * params.lambda * params.lambda * field;
}

double dissipation(const SystemState& state, const DeviceMesh& mesh, const BoundaryExtension& bc, EdgeDensity kind) {
  const EdgeFlux f = edge_fluxes(state, mesh, bc, kind);
  return f.J_n.dot(f.dphi_n) + f.J_p.dot(f.dphi_p) + f.J_D.dot(f.dphi_D);
}

EnergyReport energy_report(const SystemState& s, const DeviceMesh& mesh, const BoundaryExtension& bc,
                           const ModelParameters& params, EdgeDensity kind) {
  EnergyReport r;
  const CellField measure = mesh.measures();
  r.t = s.t;
  r.E = free_energy(s, mesh, bc, params);
  const EdgeFlux f = edge_fluxes(s, mesh, bc, kind);
  r.dissipation = f.J_n.dot(f.dphi_n) + f.J_p.dot(f.dphi_p) + f.J_D.dot(f.dphi_D);
  r.Lambda = lambda_const(bc, mesh);
  r.mass_n = measure.dot(s.n);
  r.mass_p = measure.dot(s.p);
  r.mass_D = measure.dot(s.D);
  r.n = range_of(s.n);
  r.p = range_of(s.p);
  r.D = range_of(s.D);
  r.V = range_of(s.V);
  r.n_L53 = lp_norm(s.n, measure, 5.0 / 3.0);
  r.p_L53 = lp_norm(s.p, measure, 5.0 / 3.0);
  r.grad_V_W14 = gradient_norm(s.V, bc, mesh, 4.0);
  r.flux_n = f.J_n.norm();
  r.flux_p = f.J_p.norm();
  r.flux_D = f.J_D.norm();
  return r;
}

InequalityVerdict inequality_verdict(const EnergyReport& first, const EnergyReport& prev, const EnergyReport& cur,
                                     double dissipation_integral, double Lambda, const InequalityOptions& options,
                                     int step) {
  InequalityVerdict v;
  v.step = step;
  if (Lambda == 0.0) {
    const double dt = cur.t - prev.t;
    v.slack = prev.E - (cur.E + 0.5 * dt * cur.dissipation);
    v.asserted = true;
  } else {
    const double t = cur.t - first.t;
    const double bound = (first.E + options.c * Lambda * t) * std::exp(options.c1 * Lambda * t);
    v.slack = bound - (cur.E + 0.5 * dissipation_integral);
    v.asserted = false;
  }
  v.passed = v.slack >= -options.slack;
  return v;
}

InequalityReport check_energy_inequality(const std::vector<EnergyReport>& reports, double Lambda,
                                         const InequalityOptions& options) {
  InequalityReport out;
  if (reports.size() < 2) return out;
  double integral = 0.0;
  out.worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m < reports.size(); ++m) {
    integral += (reports[m].t - reports[m - 1].t) * reports[m].dissipation;
    const auto v = inequality_verdict(reports.front(), reports[m - 1], reports[m], integral, Lambda, options,
                                      static_cast<int>(m));
    out.worst_slack = std::min(out.worst_slack, v.slack);
    if (v.asserted && !v.passed) out.passed = false;
    out.steps.push_back(v);
  }
  return out;
}

BoundednessReport boundedness_monitor(const std::vector<EnergyReport>& reports, double ceiling) {
  return boundedness_monitor(reports, ceiling, ceiling);
}

BoundednessReport boundedness_monitor(const std::vector<EnergyReport>& reports, double ceiling_n, double ceiling_p) {
  BoundednessReport out;
  double run_n = 0.0, run_p = 0.0;
  for (std::size_t m = 0; m < reports.size(); ++m) {
    run_n = std::max(run_n, reports[m].n.max);
    run_p = std::max(run_p, reports[m].p.max);
    out.running_max_n.push_back(run_n);
    out.running_max_p.push_back(run_p);
    out.n_L53 = std::max(out.n_L53, reports[m].n_L53);
    out.p_L53 = std::max(out.p_L53, reports[m].p_L53);
    if (out.failing_step < 0 && (reports[m].n.max > ceiling_n || reports[m].p.max > ceiling_p)) {
      out.failing_step = static_cast<int>(m);
    }
  }
  out.max_n = run_n;
  out.max_p = run_p;
  out.passed = out.failing_step < 0;
  std::ostringstream msg;
  if (out.passed) {
    msg << "max n = " << run_n << ", max p = " << run_p << " within ceilings " << ceiling_n << ", " << ceiling_p;
  } else {
    const auto& r = reports[static_cast<std::size_t>(out.failing_step)];
    msg << "ceiling (" << ceiling_n << ", " << ceiling_p << ") exceeded at step " << out.failing_step << " (t = " << r.t
        << ", max n = " << r.n.max << ", max p = " << r.p.max << ")";
  }
  out.message = msg.str();
  return out;
}

double poincare_constant(const DeviceMesh& mesh) {
  const int m = mesh.num_cells();
  if (m < 2) throw std::invalid_argument("poincare_constant: need at least two cells");
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  for (const Edge& e : mesh.edges()) {
    if (e.is_boundary()) continue;
    const double w = e.transmissibility();
    L(e.cell, e.cell) += w;
    L(e.neighbor, e.neighbor) += w;
    L(e.cell, e.neighbor) -= w;
    L(e.neighbor, e.cell) -= w;
  }
  const Eigen::MatrixXd M = mesh.measures().asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(L, M, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("poincare_constant: eigensolver failed");
  const double gap = solver.eigenvalues()[1];  // ascending; [0] is the constant mode
  if (!(gap > 1e-12 * solver.eigenvalues()[m - 1])) {
    throw std::runtime_error("poincare_constant: mesh is not connected");
  }
  return 1.0 / gap;
}

PoincareCheck poincare_check(const CellField& u, const DeviceMesh& mesh, double u_hat) {
  return poincare_check(u, mesh, u_hat, poincare_constant(mesh));
}

PoincareCheck poincare_check(const CellField& u, const DeviceMesh& mesh, double u_hat, double C_P) {
  if (u.size() != mesh.num_cells()) throw std::invalid_argument("poincare_check: field size does not match the mesh");
  if (!((u.array() >= 0.0).all() && (u.array() < 1.0).all())) {
    throw std::invalid_argument("poincare_check: u must lie in [0, 1)");
  }
  const CellField measure = mesh.measures();
  const double area = measure.sum();
  const double mean = measure.dot(u) / area;
  if (!(mean < u_hat && u_hat < 1.0)) {
    throw std::invalid_argument("poincare_check: hypothesis mean(u) < u_hat < 1 violated");
  }
  auto f = [](double x) { return -std::log1p(-x); };
  const CellField fu = u.unaryExpr(f);
  double grad2 = 0.0;
  for (const Edge& e : mesh.edges()) {
    if (e.is_boundary()) continue;
    const double d = fu[e.cell] - fu[e.neighbor];
    grad2 += e.transmissibility() * d * d;
  }
  PoincareCheck out;
  out.value = measure.dot(fu.cwiseProduct(fu));
  const double fh = f(u_hat);
  out.bound = 2.0 * area * fh * fh + 4.0 * C_P * (1.0 + u_hat / (u_hat - mean)) * grad2;
  out.slack = out.bound - out.value;
  return out;
}

}  // namespace memristor
