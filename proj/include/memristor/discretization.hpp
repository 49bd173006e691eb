#pragma once

#include "memristor/device.hpp"

#include <string>

namespace memristor {

/// How the density on an edge is formed from the two adjacent cell values.
enum class EdgeDensity { ArithmeticMean, Upwind };

EdgeDensity edge_density_from_string(const std::string& name);
const char* to_string(EdgeDensity kind);

/// rho_sigma from the two adjacent densities; dphi = phi_cell - phi_neighbor.
/// Upwind takes the density on the side of the larger chemical potential,
/// which is where the particles flow from.
inline double edge_density(double rho_cell, double rho_neighbor, double dphi, EdgeDensity kind) {
  if (kind == EdgeDensity::ArithmeticMean) return 0.5 * (rho_cell + rho_neighbor);
  return dphi >= 0.0 ? rho_cell : rho_neighbor;
}

/// Two-point fluxes J_sigma = tau_sigma rho_sigma (phi_cell - phi_neighbor), positive
/// when particles move from `cell` to `neighbor` (down the chemical potential).
/// Dirichlet edges use the ghost values phi_n_bar, phi_p_bar and the boundary
/// densities; Neumann edges carry no carrier flux and no boundary edge carries
/// vacancy flux. dphi_* hold phi_cell - phi_neighbor (zero where the flux is zero).
struct EdgeFlux {
  Eigen::VectorXd J_n, J_p, J_D;
  Eigen::VectorXd dphi_n, dphi_p, dphi_D;
};

EdgeFlux edge_fluxes(const SystemState& state, const DeviceMesh& mesh, const BoundaryExtension& bc,
                     EdgeDensity kind);

}  // namespace memristor
