#include "memristor/discretization.hpp"

#include <stdexcept>

namespace memristor {

EdgeDensity edge_density_from_string(const std::string& name) {
  if (name == "mean" || name == "arithmetic_mean") return EdgeDensity::ArithmeticMean;
  if (name == "upwind") return EdgeDensity::Upwind;
  throw std::invalid_argument("unknown edge density '" + name + "' (expected mean or upwind)");
}

const char* to_string(EdgeDensity kind) { return kind == EdgeDensity::ArithmeticMean ? "mean" : "upwind"; }

EdgeFlux edge_fluxes(const SystemState& s, const DeviceMesh& mesh, const BoundaryExtension& bc, EdgeDensity kind) {
  const int ne = mesh.num_edges();
  EdgeFlux f;
  for (auto* v : {&f.J_n, &f.J_p, &f.J_D, &f.dphi_n, &f.dphi_p, &f.dphi_D}) v->setZero(ne);
  for (int e = 0; e < ne; ++e) {
    const Edge& edge = mesh.edges()[static_cast<std::size_t>(e)];
    const int K = edge.cell;
    const double tau = edge.transmissibility();
    if (!edge.is_boundary()) {
      const int L = edge.neighbor;
      f.dphi_n[e] = s.phi_n[K] - s.phi_n[L];
      f.dphi_p[e] = s.phi_p[K] - s.phi_p[L];
      f.dphi_D[e] = s.phi_D[K] - s.phi_D[L];
      f.J_n[e] = tau * edge_density(s.n[K], s.n[L], f.dphi_n[e], kind) * f.dphi_n[e];
      f.J_p[e] = tau * edge_density(s.p[K], s.p[L], f.dphi_p[e], kind) * f.dphi_p[e];
      f.J_D[e] = tau * edge_density(s.D[K], s.D[L], f.dphi_D[e], kind) * f.dphi_D[e];
    } else if (edge.is_dirichlet()) {
      f.dphi_n[e] = s.phi_n[K] - bc.edge_phi_n[e];
      f.dphi_p[e] = s.phi_p[K] - bc.edge_phi_p[e];
      f.J_n[e] = tau * edge_density(s.n[K], bc.edge_n[e], f.dphi_n[e], kind) * f.dphi_n[e];
      f.J_p[e] = tau * edge_density(s.p[K], bc.edge_p[e], f.dphi_p[e], kind) * f.dphi_p[e];
    }
  }
  return f;
}

}  // namespace memristor
