#include "memristor/device.hpp"

#include "memristor/solver.hpp"
#include "memristor/statistics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace memristor {

namespace {

constexpr double kGeomTol = 1e-12;

struct SideInfo {
  Side side;
  double extent;  // length of the side
};

double side_extent(const GeometrySpec& spec, Side side) {
  if (spec.dimension == 1) return 1.0;
  return (side == Side::Left || side == Side::Right) ? spec.height : spec.length;
}

// Which contact (index into spec.contacts) claims a boundary face, or -1.
int claim_face(const GeometrySpec& spec, Side side, double tangential) {
  int owner = -1;
  for (std::size_t c = 0; c < spec.contacts.size(); ++c) {
    const auto& contact = spec.contacts[c];
    if (contact.side != side) continue;
    if (spec.dimension == 2 && !(tangential >= contact.from && tangential <= contact.to)) continue;
    owner = static_cast<int>(c);
  }
  return owner;
}

void check_contacts(const GeometrySpec& spec) {
  for (std::size_t a = 0; a < spec.contacts.size(); ++a) {
    const auto& c = spec.contacts[a];
    if (spec.dimension == 1 && c.side != Side::Left && c.side != Side::Right) {
      throw std::invalid_argument("build_mesh: contact '" + c.name + "' is not on the boundary of a 1D device (use left or right)");
    }
    if (spec.dimension == 2) {
      const double extent = side_extent(spec, c.side);
      const double lo = std::isfinite(c.from) ? c.from : 0.0;
      const double hi = std::isfinite(c.to) ? c.to : extent;
      if (!(lo < hi) || lo < -kGeomTol || hi > extent + kGeomTol) {
        throw std::invalid_argument("build_mesh: contact '" + c.name + "' range [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "] does not lie on side " + to_string(c.side));
      }
    }
    for (std::size_t b = 0; b < a; ++b) {
      const auto& o = spec.contacts[b];
      if (o.side != c.side) continue;
      const bool overlap = spec.dimension == 1 || (std::max(c.from, o.from) < std::min(c.to, o.to));
      if (overlap) {
        throw std::invalid_argument("build_mesh: contacts '" + o.name + "' and '" + c.name + "' overlap on side " +
                                    to_string(c.side));
      }
    }
  }
}

Edge boundary_edge(const GeometrySpec& spec, int cell, double measure, double distance, Point midpoint, Side side,
                   double tangential) {
  Edge e;
  e.cell = cell;
  e.measure = measure;
  e.distance = distance;
  e.midpoint = midpoint;
  e.contact = claim_face(spec, side, tangential);
  e.tag = e.contact >= 0 ? BoundaryTag::DirichletContact : BoundaryTag::NeumannInsulating;
  return e;
}

DeviceMesh build_1d(const GeometrySpec& spec) {
  const int n = spec.cells_x;
  std::vector<double> widths(static_cast<std::size_t>(n));
  double w = 1.0, total = 0.0;
  for (int i = 0; i < n; ++i) {
    widths[static_cast<std::size_t>(i)] = w;
    total += w;
    w *= spec.grading;
  }
  std::vector<double> nodes{0.0};
  for (int i = 0; i < n; ++i) nodes.push_back(nodes.back() + widths[static_cast<std::size_t>(i)] * spec.length / total);
  nodes.back() = spec.length;

  std::vector<Cell> cells;
  for (int i = 0; i < n; ++i) {
    const double a = nodes[static_cast<std::size_t>(i)], b = nodes[static_cast<std::size_t>(i) + 1];
    cells.push_back({Point(0.5 * (a + b), 0.0), b - a});
  }
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) {
    Edge e;
    e.cell = i;
    e.neighbor = i + 1;
    e.measure = 1.0;
    e.distance = cells[static_cast<std::size_t>(i) + 1].centroid.x() - cells[static_cast<std::size_t>(i)].centroid.x();
    e.midpoint = Point(nodes[static_cast<std::size_t>(i) + 1], 0.0);
    edges.push_back(e);
  }
  edges.push_back(boundary_edge(spec, 0, 1.0, cells.front().measure / 2, Point(0.0, 0.0), Side::Left, 0.0));
  edges.push_back(boundary_edge(spec, n - 1, 1.0, cells.back().measure / 2, Point(spec.length, 0.0), Side::Right, 0.0));
  std::vector<std::string> names;
  for (const auto& c : spec.contacts) names.push_back(c.name);
  return DeviceMesh(1, std::move(cells), std::move(edges), std::move(names), spec.length, 0.0);
}

DeviceMesh build_2d(const GeometrySpec& spec) {
  const int nx = spec.cells_x, ny = spec.cells_y;
  const double hx = spec.length / nx, hy = spec.height / ny;
  auto id = [nx](int i, int j) { return i + nx * j; };
  std::vector<Cell> cells;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) cells.push_back({Point((i + 0.5) * hx, (j + 0.5) * hy), hx * hy});
  }
  std::vector<Edge> edges;
  // interior faces: vertical (x-neighbours) first, then horizontal
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      Edge e;
      e.cell = id(i, j);
      e.neighbor = id(i + 1, j);
      e.measure = hy;
      e.distance = hx;
      e.midpoint = Point((i + 1) * hx, (j + 0.5) * hy);
      edges.push_back(e);
    }
  }
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Edge e;
      e.cell = id(i, j);
      e.neighbor = id(i, j + 1);
      e.measure = hx;
      e.distance = hy;
      e.midpoint = Point((i + 0.5) * hx, (j + 1) * hy);
      edges.push_back(e);
    }
  }
  for (int j = 0; j < ny; ++j) {
    const double y = (j + 0.5) * hy;
    edges.push_back(boundary_edge(spec, id(0, j), hy, hx / 2, Point(0.0, y), Side::Left, y));
  }
  for (int j = 0; j < ny; ++j) {
    const double y = (j + 0.5) * hy;
    edges.push_back(boundary_edge(spec, id(nx - 1, j), hy, hx / 2, Point(spec.length, y), Side::Right, y));
  }
  for (int i = 0; i < nx; ++i) {
    const double x = (i + 0.5) * hx;
    edges.push_back(boundary_edge(spec, id(i, 0), hx, hy / 2, Point(x, 0.0), Side::Bottom, x));
  }
  for (int i = 0; i < nx; ++i) {
    const double x = (i + 0.5) * hx;
    edges.push_back(boundary_edge(spec, id(i, ny - 1), hx, hy / 2, Point(x, spec.height), Side::Top, x));
  }
  std::vector<std::string> names;
  for (const auto& c : spec.contacts) names.push_back(c.name);
  return DeviceMesh(2, std::move(cells), std::move(edges), std::move(names), spec.length, spec.height);
}

nlohmann::json point_json(const Point& p) { return nlohmann::json::array({p.x(), p.y()}); }
Point point_from(const nlohmann::json& j) { return Point(j.at(0).get<double>(), j.at(1).get<double>()); }

BoundaryTag tag_from_string(const std::string& s) {
  if (s == "interior") return BoundaryTag::Interior;
  if (s == "dirichlet") return BoundaryTag::DirichletContact;
  if (s == "neumann") return BoundaryTag::NeumannInsulating;
  throw std::invalid_argument("unknown boundary tag '" + s + "'");
}

}  // namespace

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Interior: return "interior";
    case BoundaryTag::DirichletContact: return "dirichlet";
    case BoundaryTag::NeumannInsulating: return "neumann";
  }
  return "?";
}

const char* to_string(Side side) {
  switch (side) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    case Side::Top: return "top";
  }
  return "?";
}

Side side_from_string(const std::string& name) {
  if (name == "left") return Side::Left;
  if (name == "right") return Side::Right;
  if (name == "bottom") return Side::Bottom;
  if (name == "top") return Side::Top;
  throw std::invalid_argument("unknown side '" + name + "' (expected left, right, bottom or top)");
}

DeviceMesh::DeviceMesh(int dimension, std::vector<Cell> cells, std::vector<Edge> edges,
                       std::vector<std::string> contacts, double length, double height)
    : dimension_(dimension),
      cells_(std::move(cells)),
      edges_(std::move(edges)),
      contacts_(std::move(contacts)),
      length_(length),
      height_(height) {
  if (dimension_ != 1 && dimension_ != 2) throw std::invalid_argument("DeviceMesh: dimension must be 1 or 2");
  if (cells_.empty()) throw std::invalid_argument("DeviceMesh: mesh has no cells");
  const int n = num_cells();
  for (const auto& c : cells_) {
    if (!(c.measure > 0.0)) throw std::invalid_argument("DeviceMesh: cell measures must be positive");
  }
  for (const auto& e : edges_) {
    if (e.cell < 0 || e.cell >= n || e.neighbor >= n || e.neighbor == e.cell) {
      throw std::invalid_argument("DeviceMesh: edge references an invalid cell");
    }
    if (!(e.measure > 0.0 && e.distance > 0.0)) {
      throw std::invalid_argument("DeviceMesh: edge measure and distance must be positive");
    }
    if (e.is_boundary() == (e.tag == BoundaryTag::Interior)) {
      throw std::invalid_argument("DeviceMesh: interior edges need two cells, boundary edges exactly one");
    }
    if (e.is_dirichlet() && (e.contact < 0 || e.contact >= static_cast<int>(contacts_.size()))) {
      throw std::invalid_argument("DeviceMesh: Dirichlet edge without a contact");
    }
  }
  for (int c = 0; c < static_cast<int>(contacts_.size()); ++c) {
    const bool used = std::any_of(edges_.begin(), edges_.end(), [c](const Edge& e) { return e.contact == c; });
    if (!used) throw std::invalid_argument("DeviceMesh: contact '" + contacts_[static_cast<std::size_t>(c)] + "' covers no boundary face");
  }
  if (!(dirichlet_measure() > 0.0)) {
    throw std::invalid_argument("DeviceMesh: Dirichlet boundary has measure zero (assumption A1 requires m(Gamma_D) > 0)");
  }
}

CellField DeviceMesh::measures() const {
  CellField m(num_cells());
  for (int i = 0; i < num_cells(); ++i) m[i] = cells_[static_cast<std::size_t>(i)].measure;
  return m;
}

double DeviceMesh::domain_measure() const { return measures().sum(); }

double DeviceMesh::dirichlet_measure() const {
  double total = 0.0;
  for (const auto& e : edges_) {
    if (e.is_dirichlet()) total += e.measure;
  }
  return total;
}

int DeviceMesh::count_edges(BoundaryTag tag) const {
  return static_cast<int>(std::count_if(edges_.begin(), edges_.end(), [tag](const Edge& e) { return e.tag == tag; }));
}

DeviceMesh build_mesh(const GeometrySpec& spec) {
  if (spec.dimension != 1 && spec.dimension != 2) throw std::invalid_argument("build_mesh: dimension must be 1 or 2");
  if (spec.cells_x < 1 || (spec.dimension == 2 && spec.cells_y < 1)) {
    throw std::invalid_argument("build_mesh: number of cells must be positive");
  }
  if (!(spec.length > 0.0) || (spec.dimension == 2 && !(spec.height > 0.0))) {
    throw std::invalid_argument("build_mesh: device extent must be positive");
  }
  if (!(spec.grading > 0.0)) throw std::invalid_argument("build_mesh: grading ratio must be positive");
  if (spec.dimension == 2 && spec.grading != 1.0) {
    throw std::invalid_argument("build_mesh: grading is only supported for 1D meshes");
  }
  if (spec.contacts.empty()) {
    throw std::invalid_argument("build_mesh: no contacts, Dirichlet boundary has measure zero (assumption A1)");
  }
  check_contacts(spec);
  return spec.dimension == 1 ? build_1d(spec) : build_2d(spec);
}

std::string serialize_mesh(const DeviceMesh& mesh) {
  nlohmann::json j;
  j["dimension"] = mesh.dimension();
  j["length"] = mesh.length();
  j["height"] = mesh.height();
  j["contacts"] = mesh.contacts();
  auto& cells = j["cells"] = nlohmann::json::array();
  for (const auto& c : mesh.cells()) cells.push_back({{"centroid", point_json(c.centroid)}, {"measure", c.measure}});
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& e : mesh.edges()) {
    edges.push_back({{"cell", e.cell},
                     {"neighbor", e.neighbor},
                     {"measure", e.measure},
                     {"distance", e.distance},
                     {"midpoint", point_json(e.midpoint)},
                     {"tag", to_string(e.tag)},
                     {"contact", e.contact}});
  }
  return j.dump(1);
}

DeviceMesh deserialize_mesh(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  std::vector<Cell> cells;
  for (const auto& c : j.at("cells")) cells.push_back({point_from(c.at("centroid")), c.at("measure").get<double>()});
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    Edge edge;
    edge.cell = e.at("cell").get<int>();
    edge.neighbor = e.at("neighbor").get<int>();
    edge.measure = e.at("measure").get<double>();
    edge.distance = e.at("distance").get<double>();
    edge.midpoint = point_from(e.at("midpoint"));
    edge.tag = tag_from_string(e.at("tag").get<std::string>());
    edge.contact = e.at("contact").get<int>();
    edges.push_back(edge);
  }
  return DeviceMesh(j.at("dimension").get<int>(), std::move(cells), std::move(edges),
                    j.at("contacts").get<std::vector<std::string>>(), j.at("length").get<double>(),
                    j.at("height").get<double>());
}

Profile Profile::piecewise(std::vector<double> breaks, std::vector<double> values) {
  if (values.size() != breaks.size() + 1) {
    throw std::invalid_argument("Profile::piecewise: need one more value than breakpoints");
  }
  if (!std::is_sorted(breaks.begin(), breaks.end())) {
    throw std::invalid_argument("Profile::piecewise: breakpoints must be ascending");
  }
  return Profile(Piecewise{std::move(breaks), std::move(values)});
}

Profile Profile::tabulated(std::vector<double> x, std::vector<double> values) {
  if (x.empty() || x.size() != values.size()) {
    throw std::invalid_argument("Profile::tabulated: need matching, non-empty abscissae and values");
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("Profile::tabulated: abscissae must be strictly increasing");
  }
  return Profile(Tabulated{std::move(x), std::move(values)});
}

double Profile::operator()(const Point& p) const {
  return std::visit(
      [&p](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return r.value;
        } else if constexpr (std::is_same_v<T, Linear>) {
          return r.value + r.slope_x * p.x() + r.slope_y * p.y();
        } else if constexpr (std::is_same_v<T, Piecewise>) {
          const auto it = std::upper_bound(r.breaks.begin(), r.breaks.end(), p.x());
          return r.values[static_cast<std::size_t>(it - r.breaks.begin())];
        } else {
          if (p.x() <= r.x.front()) return r.values.front();
          if (p.x() >= r.x.back()) return r.values.back();
          const auto it = std::upper_bound(r.x.begin(), r.x.end(), p.x());
          const std::size_t i = static_cast<std::size_t>(it - r.x.begin());
          const double w = (p.x() - r.x[i - 1]) / (r.x[i] - r.x[i - 1]);
          return (1.0 - w) * r.values[i - 1] + w * r.values[i];
        }
      },
      rep_);
}

CellField Profile::at_cells(const DeviceMesh& mesh) const {
  CellField v(mesh.num_cells());
  for (int i = 0; i < mesh.num_cells(); ++i) v[i] = (*this)(mesh.cells()[static_cast<std::size_t>(i)].centroid);
  return v;
}

BoundaryData::BoundaryData(CarrierBoundary n, CarrierBoundary p, Profile V_bar)
    : n_(std::move(n)), p_(std::move(p)), V_bar_(std::move(V_bar)) {}

BoundaryData BoundaryData::from_densities(Profile n_bar, Profile p_bar, Profile V_bar) {
  return BoundaryData({CarrierBoundary::Mode::Density, std::move(n_bar)},
                      {CarrierBoundary::Mode::Density, std::move(p_bar)}, std::move(V_bar));
}

BoundaryData BoundaryData::equilibrium(double phi_n, double phi_p, Profile V_bar) {
  return BoundaryData({CarrierBoundary::Mode::QuasiFermi, Profile::constant(phi_n)},
                      {CarrierBoundary::Mode::QuasiFermi, Profile::constant(phi_p)}, std::move(V_bar));
}

double BoundaryData::n_bar(const Point& x) const {
  const double v = n_.mode == CarrierBoundary::Mode::Density ? n_.profile(x) : fd_half(n_.profile(x) + V_bar(x));
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument("boundary data: n_bar must be positive and finite (assumption A3)");
  }
  return v;
}

double BoundaryData::p_bar(const Point& x) const {
  const double v = p_.mode == CarrierBoundary::Mode::Density ? p_.profile(x) : fd_half(p_.profile(x) - V_bar(x));
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument("boundary data: p_bar must be positive and finite (assumption A3)");
  }
  return v;
}

double BoundaryData::phi_n_bar(const Point& x) const {
  if (n_.mode == CarrierBoundary::Mode::QuasiFermi) return n_.profile(x);
  return inverse_fd_half(n_bar(x)) - V_bar(x);
}

double BoundaryData::phi_p_bar(const Point& x) const {
  if (p_.mode == CarrierBoundary::Mode::QuasiFermi) return p_.profile(x);
  return inverse_fd_half(p_bar(x)) + V_bar(x);
}

BoundaryExtension extend(const BoundaryData& bc, const DeviceMesh& mesh) {
  BoundaryExtension ext;
  const int nc = mesh.num_cells(), ne = mesh.num_edges();
  for (auto* f : {&ext.n_bar, &ext.p_bar, &ext.V_bar, &ext.y_n_bar, &ext.y_p_bar, &ext.phi_n_bar, &ext.phi_p_bar}) {
    f->resize(nc);
  }
  for (int i = 0; i < nc; ++i) {
    const Point& x = mesh.cells()[static_cast<std::size_t>(i)].centroid;
    ext.V_bar[i] = bc.V_bar(x);
    ext.n_bar[i] = bc.n_bar(x);
    ext.p_bar[i] = bc.p_bar(x);
    ext.phi_n_bar[i] = bc.phi_n_bar(x);
    ext.phi_p_bar[i] = bc.phi_p_bar(x);
    ext.y_n_bar[i] = ext.phi_n_bar[i] + ext.V_bar[i];
    ext.y_p_bar[i] = ext.phi_p_bar[i] - ext.V_bar[i];
  }
  for (auto* f : {&ext.edge_n, &ext.edge_p, &ext.edge_V, &ext.edge_phi_n, &ext.edge_phi_p}) f->setZero(ne);
  for (int e = 0; e < ne; ++e) {
    const Edge& edge = mesh.edges()[static_cast<std::size_t>(e)];
    if (!edge.is_dirichlet()) continue;
    ext.edge_V[e] = bc.V_bar(edge.midpoint);
    ext.edge_n[e] = bc.n_bar(edge.midpoint);
    ext.edge_p[e] = bc.p_bar(edge.midpoint);
    ext.edge_phi_n[e] = bc.phi_n_bar(edge.midpoint);
    ext.edge_phi_p[e] = bc.phi_p_bar(edge.midpoint);
  }
  return ext;
}

void ModelParameters::validate(const DeviceMesh& mesh) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("model parameters: lambda must be positive (assumption A2)");
  }
  if (!(final_time >= 0.0) || !std::isfinite(final_time)) {
    throw std::invalid_argument("model parameters: final_time must be a nonnegative number (assumption A2)");
  }
  if (doping.size() != mesh.num_cells()) {
    throw std::invalid_argument("model parameters: doping must have one value per cell");
  }
  if (!doping.allFinite()) throw std::invalid_argument("model parameters: doping must be bounded (assumption A2)");
}

SystemState make_state(const CellField& n, const CellField& p, const CellField& D, const CellField& V, double t,
                       double saturation_eps) {
  const Eigen::Index m = V.size();
  if (n.size() != m || p.size() != m || D.size() != m) throw std::invalid_argument("make_state: field sizes differ");
  SystemState s;
  s.t = t;
  s.V = V;
  s.phi_n.resize(m);
  s.phi_p.resize(m);
  s.phi_D.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    s.phi_n[i] = inverse_fd_half(std::max(n[i], kDensityFloor)) - V[i];
    s.phi_p[i] = inverse_fd_half(std::max(p[i], kDensityFloor)) + V[i];
    const double d = std::clamp(D[i], kDensityFloor, 1.0 - saturation_eps);
    s.phi_D[i] = std::log(d) - std::log1p(-d) + V[i];
  }
  sync_densities(s);
  return s;
}

void sync_densities(SystemState& s) {
  const Eigen::Index m = s.V.size();
  s.n.resize(m);
  s.p.resize(m);
  s.D.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    s.n[i] = fd_half(s.phi_n[i] + s.V[i]);
    s.p[i] = fd_half(s.phi_p[i] - s.V[i]);
    s.D[i] = blakemore(s.phi_D[i] - s.V[i]);
  }
}

double statistics_consistency(const SystemState& s) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < s.V.size(); ++i) {
    worst = std::max(worst, std::abs(s.n[i] - fd_half(s.phi_n[i] + s.V[i])));
    worst = std::max(worst, std::abs(s.p[i] - fd_half(s.phi_p[i] - s.V[i])));
    worst = std::max(worst, std::abs(s.D[i] - blakemore(s.phi_D[i] - s.V[i])));
  }
  return worst;
}

std::string InitialDataReport::describe() const {
  std::ostringstream out;
  for (const auto& v : violations) {
    out << v.assumption << " " << v.field << ": " << v.message;
    if (!v.cells.empty()) {
      out << " (cells";
      for (std::size_t i = 0; i < v.cells.size() && i < 10; ++i) out << " " << v.cells[i];
      if (v.cells.size() > 10) out << " ... " << v.cells.size() << " total";
      out << ")";
    }
    out << "\n";
  }
  return out.str();
}

InitialDataReport validate_initial_data(const CellField& n0, const CellField& p0, const CellField& D0,
                                        const DeviceMesh& mesh, const BoundaryExtension& bc,
                                        const ModelParameters& params, double saturation_eps) {
  InitialDataReport report;
  const int m = mesh.num_cells();
  auto check = [&](const CellField& f, const char* name, double upper, const char* bound_text) {
    if (f.size() != m) {
      report.violations.push_back({"A4", name, {}, "expected " + std::to_string(m) + " cell values"});
      return;
    }
    AssumptionViolation v{"A4", name, {}, std::string("must lie in ") + bound_text};
    for (int i = 0; i < m; ++i) {
      if (!(f[i] >= 0.0 && f[i] <= upper)) v.cells.push_back(i);
    }
    if (!v.cells.empty()) report.violations.push_back(std::move(v));
  };
  const double inf = std::numeric_limits<double>::max();
  check(n0, "n0", inf, "[0, inf)");
  check(p0, "p0", inf, "[0, inf)");
  check(D0, "D0", 1.0, "[0, 1]");
  if (D0.size() == m) {
    const CellField measure = mesh.measures();
    report.mean_D = measure.dot(D0) / measure.sum();
    if (!(report.mean_D < 1.0)) {
      report.violations.push_back({"A4", "D0", {}, "cell-measure-weighted mean is " + std::to_string(report.mean_D) +
                                                       ", must be < 1"});
    }
  }
  if (!report.accepted()) return report;

  // Densities enter the Poisson source as given; the solve does not depend on
  // the potentials, so floors and the saturation guard are applied afterwards.
  const CellField V0 = solve_poisson(n0, p0, D0, mesh, bc, params);
  report.state = make_state(n0, p0, D0, V0, 0.0, saturation_eps);
  return report;
}

double lambda_const(const BoundaryExtension& bc, const DeviceMesh& mesh) {
  double max_n = 0.0, max_p = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edges()[static_cast<std::size_t>(e)];
    double dn, dp;
    if (!edge.is_boundary()) {
      dn = bc.phi_n_bar[edge.neighbor] - bc.phi_n_bar[edge.cell];
      dp = bc.phi_p_bar[edge.neighbor] - bc.phi_p_bar[edge.cell];
    } else if (edge.is_dirichlet()) {
      dn = bc.edge_phi_n[e] - bc.phi_n_bar[edge.cell];
      dp = bc.edge_phi_p[e] - bc.phi_p_bar[edge.cell];
    } else {
      continue;
    }
    max_n = std::max(max_n, std::pow(dn / edge.distance, 2));
    max_p = std::max(max_p, std::pow(dp / edge.distance, 2));
  }
  return 2.0 * (max_n + max_p);
}

double gradient_norm(const CellField& V, const BoundaryExtension& bc, const DeviceMesh& mesh, double r) {
  // sum over edges of m(sigma) d_sigma |DV / d_sigma|^r, i.e. the diamond-cell quadrature of |grad V|^r
  double acc = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edges()[static_cast<std::size_t>(e)];
    double dv;
    if (!edge.is_boundary()) {
      dv = V[edge.neighbor] - V[edge.cell];
    } else if (edge.is_dirichlet()) {
      dv = bc.edge_V[e] - V[edge.cell];
    } else {
      continue;
    }
    acc += edge.measure * edge.distance * std::pow(std::abs(dv) / edge.distance, r);
  }
  return std::pow(acc, 1.0 / r);
}

}  // namespace memristor
