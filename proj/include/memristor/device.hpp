#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace memristor {

using CellField = Eigen::VectorXd;
using Point = Eigen::Vector2d;

enum class BoundaryTag { Interior, DirichletContact, NeumannInsulating };
enum class Side { Left, Right, Bottom, Top };

const char* to_string(BoundaryTag tag);
const char* to_string(Side side);
Side side_from_string(const std::string& name);

struct Cell {
  Point centroid = Point::Zero();
  double measure = 0.0;

  bool operator==(const Cell&) const = default;
};

/// Face between two control volumes, or between a volume and the boundary.
/// For boundary edges `neighbor` is -1 and `distance` is the centroid to
/// face-midpoint distance. Positive fluxes point from `cell` to `neighbor`.
struct Edge {
  int cell = -1;
  int neighbor = -1;
  double measure = 0.0;
  double distance = 0.0;
  Point midpoint = Point::Zero();
  BoundaryTag tag = BoundaryTag::Interior;
  int contact = -1;

  bool is_boundary() const { return neighbor < 0; }
  bool is_dirichlet() const { return tag == BoundaryTag::DirichletContact; }
  /// Transmissibility m(sigma)/d_sigma.
  double transmissibility() const { return measure / distance; }

  bool operator==(const Edge&) const = default;
};

/// Contact segment on one side of the device; [from, to] is the range of the
/// tangential coordinate. Ignored in 1D, where a side is a single point.
struct ContactSpec {
  std::string name;
  Side side = Side::Left;
  double from = -std::numeric_limits<double>::infinity();
  double to = std::numeric_limits<double>::infinity();
};

struct GeometrySpec {
  int dimension = 1;
  double length = 1.0;  // x extent
  double height = 1.0;  // y extent, 2D only
  int cells_x = 0;
  int cells_y = 1;
  /// Ratio between consecutive 1D cell widths; 1 gives a uniform mesh.
  double grading = 1.0;
  std::vector<ContactSpec> contacts;
};

class DeviceMesh {
 public:
  DeviceMesh() = default;
  DeviceMesh(int dimension, std::vector<Cell> cells, std::vector<Edge> edges, std::vector<std::string> contacts,
             double length, double height);

  int dimension() const { return dimension_; }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::string>& contacts() const { return contacts_; }
  double length() const { return length_; }
  double height() const { return height_; }

  CellField measures() const;
  double domain_measure() const;
  double dirichlet_measure() const;
  int count_edges(BoundaryTag tag) const;

  bool operator==(const DeviceMesh&) const = default;

 private:
  int dimension_ = 1;
  std::vector<Cell> cells_;
  std::vector<Edge> edges_;
  std::vector<std::string> contacts_;
  double length_ = 0.0;
  double height_ = 0.0;
};

/// Builds a 1D interval or 2D tensor-product mesh. Throws std::invalid_argument
/// on zero cells, contacts off the boundary, overlapping contacts or a
/// Dirichlet boundary of measure zero.
DeviceMesh build_mesh(const GeometrySpec& spec);

std::string serialize_mesh(const DeviceMesh& mesh);
DeviceMesh deserialize_mesh(const std::string& text);

/// Scalar profile over the device: constant, affine, piecewise constant in x,
/// or tabulated in x with linear interpolation.
class Profile {
 public:
  struct Constant {
    double value;
  };
  struct Linear {
    double value;  // at the origin
    double slope_x;
    double slope_y;
  };
  struct Piecewise {
    std::vector<double> breaks;  // ascending; values.size() == breaks.size() + 1
    std::vector<double> values;
  };
  struct Tabulated {
    std::vector<double> x;
    std::vector<double> values;
  };

  Profile() : rep_(Constant{0.0}) {}
  static Profile constant(double v) { return Profile(Constant{v}); }
  static Profile linear(double v0, double slope_x, double slope_y = 0.0) { return Profile(Linear{v0, slope_x, slope_y}); }
  static Profile piecewise(std::vector<double> breaks, std::vector<double> values);
  static Profile tabulated(std::vector<double> x, std::vector<double> values);

  double operator()(const Point& x) const;
  CellField at_cells(const DeviceMesh& mesh) const;
  bool is_constant() const { return std::holds_alternative<Constant>(rep_); }

 private:
  using Rep = std::variant<Constant, Linear, Piecewise, Tabulated>;
  explicit Profile(Rep rep) : rep_(std::move(rep)) {}
  Rep rep_;
};

/// Dirichlet data for one carrier, given either as a density profile or as a
/// quasi-Fermi (chemical) potential profile.
struct CarrierBoundary {
  enum class Mode { Density, QuasiFermi };
  Mode mode = Mode::Density;
  Profile profile;
};

/// Boundary data n_bar, p_bar, V_bar, represented by profiles over the whole
/// device so the interior extension is available to the free energy.
class BoundaryData {
 public:
  BoundaryData(CarrierBoundary n, CarrierBoundary p, Profile V_bar);

  static BoundaryData from_densities(Profile n_bar, Profile p_bar, Profile V_bar);
  /// Thermal equilibrium: constant quasi-Fermi levels, arbitrary potential.
  static BoundaryData equilibrium(double phi_n, double phi_p, Profile V_bar);

  double V_bar(const Point& x) const { return V_bar_(x); }
  double n_bar(const Point& x) const;
  double p_bar(const Point& x) const;
  /// g(n_bar) - V_bar
  double phi_n_bar(const Point& x) const;
  /// g(p_bar) + V_bar
  double phi_p_bar(const Point& x) const;

 private:
  CarrierBoundary n_;
  CarrierBoundary p_;
  Profile V_bar_;
};

/// Boundary data evaluated on a mesh: cell values of the extension and trace
/// values on every edge (only Dirichlet entries are used by the solver).
struct BoundaryExtension {
  CellField n_bar, p_bar, V_bar;
  CellField y_n_bar, y_p_bar;  // g(n_bar), g(p_bar)
  CellField phi_n_bar, phi_p_bar;
  Eigen::VectorXd edge_n, edge_p, edge_V, edge_phi_n, edge_phi_p;
};

BoundaryExtension extend(const BoundaryData& bc, const DeviceMesh& mesh);

struct ModelParameters {
  double lambda = 1.0;
  CellField doping;
  double final_time = 1.0;

  void validate(const DeviceMesh& mesh) const;
};

/// Cell fields at one instant. The chemical potentials are the primary
/// unknowns: n = F_{1/2}(phi_n + V), p = F_{1/2}(phi_p - V), D = F_{-1}(phi_D - V).
struct SystemState {
  double t = 0.0;
  CellField n, p, D, V;
  CellField phi_n, phi_p, phi_D;
};

/// Smallest carrier density representable in chemical-potential variables.
inline constexpr double kDensityFloor = 1e-100;

/// Builds a consistent state from densities and potential: densities are
/// floored at kDensityFloor, D is capped at 1 - saturation_eps, potentials
/// computed, then densities recomputed from the potentials.
SystemState make_state(const CellField& n, const CellField& p, const CellField& D, const CellField& V, double t,
                       double saturation_eps = 1e-12);

/// Recomputes n, p, D from phi and V.
void sync_densities(SystemState& state);

/// Max deviation of the statistics relations over all cells.
double statistics_consistency(const SystemState& state);

struct AssumptionViolation {
  std::string assumption;  // "A4", ...
  std::string field;
  std::vector<int> cells;
  std::string message;
};

struct InitialDataReport {
  std::vector<AssumptionViolation> violations;
  double mean_D = 0.0;
  std::optional<SystemState> state;

  bool accepted() const { return violations.empty(); }
  std::string describe() const;
};

/// Checks nonnegativity, D in [0,1] and mean(D) < 1; on success solves the
/// Poisson problem for V^0 and returns the initial state.
InitialDataReport validate_initial_data(const CellField& n0, const CellField& p0, const CellField& D0,
                                        const DeviceMesh& mesh, const BoundaryExtension& bc,
                                        const ModelParameters& params, double saturation_eps = 1e-12);

/// Lambda = 2 (max_sigma |d(g(n_bar) - V_bar)|^2 + max_sigma |d(g(p_bar) + V_bar)|^2)
/// over edge difference quotients, including Dirichlet traces.
double lambda_const(const BoundaryExtension& bc, const DeviceMesh& mesh);

/// Discrete W^{1,r} seminorm of V, reported for monitoring only.
double gradient_norm(const CellField& V, const BoundaryExtension& bc, const DeviceMesh& mesh, double r);

}  // namespace memristor
