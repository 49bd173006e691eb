#include "memristor/scenario.hpp"

#include "memristor/statistics.hpp"

#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

namespace memristor {

namespace {

std::string with_assumption(const std::string& field, const std::string& message, const std::string& assumption) {
  std::string out = field + ": " + message;
  if (!assumption.empty() && message.find("assumption " + assumption) == std::string::npos) {
    out += " (assumption " + assumption + ")";
  }
  return out;
}

// "(assumption A3)" inside a library error message -> "A3"
std::string assumption_in(const std::string& message) {
  static const std::regex tag("assumption (A[1-5])");
  std::smatch m;
  return std::regex_search(message, m, tag) ? m[1].str() : std::string{};
}

void reject_unknown(const toml::table& table, const std::string& prefix, std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, node] : table) {
    const std::string k(key.str());
    if (!allowed.count(k)) throw ConfigError(prefix + k, "unknown key");
  }
}

const toml::table* subtable(const toml::table& parent, const char* key, const std::string& field) {
  const toml::node* node = parent.get(key);
  if (!node) return nullptr;
  if (!node->is_table()) throw ConfigError(field, "expected a table");
  return node->as_table();
}

double number(const toml::node& node, const std::string& field) {
  if (auto v = node.value<double>()) {
    if (!std::isfinite(*v)) throw ConfigError(field, "must be finite");
    return *v;
  }
  throw ConfigError(field, "expected a number");
}

template <class T>
void read(const toml::table& t, const char* key, const std::string& prefix, T& out) {
  const toml::node* node = t.get(key);
  if (!node) return;
  const std::string field = prefix + key;
  if constexpr (std::is_same_v<T, double>) {
    out = number(*node, field);
  } else if constexpr (std::is_same_v<T, bool>) {
    auto v = node->value<bool>();
    if (!v) throw ConfigError(field, "expected true or false");
    out = *v;
  } else if constexpr (std::is_same_v<T, std::string>) {
    auto v = node->value<std::string>();
    if (!v) throw ConfigError(field, "expected a string");
    out = *v;
  } else {
    auto v = node->value<std::int64_t>();
    if (!v || node->is_floating_point()) throw ConfigError(field, "expected an integer");
    out = static_cast<T>(*v);
  }
}

std::vector<double> numbers(const toml::node& node, const std::string& field) {
  const toml::array* arr = node.as_array();
  if (!arr) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < arr->size(); ++i) out.push_back(number(*arr->get(i), field + "[" + std::to_string(i) + "]"));
  return out;
}

// Two-column CSV (x, value); a non-numeric first line is taken as a header.
Profile read_tabulated(const std::filesystem::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open " + path.string());
  std::vector<double> x, v;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b;
    if (!(row >> a >> b)) {
      if (x.empty() && lineno == 1) continue;
      throw ConfigError(field, path.string() + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    x.push_back(a);
    v.push_back(b);
  }
  try {
    return Profile::tabulated(std::move(x), std::move(v));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

// number | {type = "constant" | "linear" | "piecewise" | "tabulated", ...}
Profile profile(const toml::node& node, const std::string& field, const std::filesystem::path& base) {
  if (node.is_number()) return Profile::constant(number(node, field));
  const toml::table* t = node.as_table();
  if (!t) throw ConfigError(field, "expected a number or a profile table");
  std::string type;
  read(*t, "type", field + ".", type);
  const std::string prefix = field + ".";
  try {
    if (type == "constant") {
      reject_unknown(*t, prefix, {"type", "value"});
      double value = 0.0;
      read(*t, "value", prefix, value);
      return Profile::constant(value);
    }
    if (type == "linear") {
      reject_unknown(*t, prefix, {"type", "value", "slope_x", "slope_y"});
      double value = 0.0, sx = 0.0, sy = 0.0;
      read(*t, "value", prefix, value);
      read(*t, "slope_x", prefix, sx);
      read(*t, "slope_y", prefix, sy);
      return Profile::linear(value, sx, sy);
    }
    if (type == "piecewise") {
      reject_unknown(*t, prefix, {"type", "breaks", "values"});
      if (!t->get("breaks") || !t->get("values")) throw ConfigError(field, "piecewise profile needs breaks and values");
      return Profile::piecewise(numbers(*t->get("breaks"), prefix + "breaks"), numbers(*t->get("values"), prefix + "values"));
    }
    if (type == "tabulated") {
      reject_unknown(*t, prefix, {"type", "file", "x", "values"});
      if (const toml::node* file = t->get("file")) {
        auto name = file->value<std::string>();
        if (!name) throw ConfigError(prefix + "file", "expected a path");
        std::filesystem::path p(*name);
        return read_tabulated(p.is_absolute() ? p : base / p, prefix + "file");
      }
      if (!t->get("x") || !t->get("values")) throw ConfigError(field, "tabulated profile needs file or x and values");
      return Profile::tabulated(numbers(*t->get("x"), prefix + "x"), numbers(*t->get("values"), prefix + "values"));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError(prefix + "type", "expected constant, linear, piecewise or tabulated, got '" + type + "'");
}

InitialProfile initial_profile(const toml::node& node, const std::string& field, const std::filesystem::path& base,
                               bool allow_boundary) {
  if (auto s = node.value<std::string>()) {
    if (allow_boundary && *s == "equilibrium") return {true, {}};
    throw ConfigError(field, "unknown profile '" + *s + "'" + (allow_boundary ? " (expected \"equilibrium\")" : ""));
  }
  return {false, profile(node, field, base)};
}

ContactSpec contact(const toml::node& node, const std::string& field) {
  const toml::table* t = node.as_table();
  if (!t) throw ConfigError(field, "expected a table with name and side");
  reject_unknown(*t, field + ".", {"name", "side", "from", "to"});
  ContactSpec c;
  std::string side;
  read(*t, "name", field + ".", c.name);
  read(*t, "side", field + ".", side);
  if (side.empty()) throw ConfigError(field + ".side", "missing");
  try {
    c.side = side_from_string(side);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field + ".side", e.what());
  }
  if (c.name.empty()) c.name = side;
  read(*t, "from", field + ".", c.from);
  read(*t, "to", field + ".", c.to);
  return c;
}

void read_device(const toml::table& t, Scenario& s) {
  const std::string P = "device.";
  reject_unknown(t, P, {"dimension", "length", "height", "cells", "cells_x", "cells_y", "grading", "lambda",
                        "final_time", "doping", "contacts", "initial"});
  GeometrySpec& g = s.geometry;
  read(t, "dimension", P, g.dimension);
  read(t, "length", P, g.length);
  read(t, "height", P, g.height);
  read(t, "cells", P, g.cells_x);
  read(t, "cells_x", P, g.cells_x);
  read(t, "cells_y", P, g.cells_y);
  read(t, "grading", P, g.grading);
  read(t, "lambda", P, s.lambda);
  read(t, "final_time", P, s.final_time);
  if (const toml::node* d = t.get("doping")) s.doping = profile(*d, P + "doping", s.base_dir);
  if (const toml::node* c = t.get("contacts")) {
    const toml::array* arr = c->as_array();
    if (!arr) throw ConfigError(P + "contacts", "expected an array of tables ([[device.contacts]])");
    for (std::size_t i = 0; i < arr->size(); ++i) {
      g.contacts.push_back(contact(*arr->get(i), P + "contacts[" + std::to_string(i) + "]"));
    }
  }
  if (const toml::table* init = subtable(t, "initial", P + "initial")) {
    const std::string Q = P + "initial.";
    reject_unknown(*init, Q, {"n", "p", "D", "perturbation", "seed"});
    if (const toml::node* n = init->get("n")) s.n0 = initial_profile(*n, Q + "n", s.base_dir, true);
    if (const toml::node* p = init->get("p")) s.p0 = initial_profile(*p, Q + "p", s.base_dir, true);
    if (const toml::node* D = init->get("D")) s.D0 = initial_profile(*D, Q + "D", s.base_dir, false);
    read(*init, "perturbation", Q, s.perturbation);
    read(*init, "seed", Q, s.seed);
    if (!(s.perturbation >= 0.0 && s.perturbation < 1.0)) throw ConfigError(Q + "perturbation", "must lie in [0, 1)");
  }
}

void read_boundary(const toml::table& t, Scenario& s) {
  const std::string P = "boundary.";
  reject_unknown(t, P, {"mode", "n_bar", "p_bar", "V", "U", "ramp_time"});
  std::string mode = "equilibrium";
  read(t, "mode", P, mode);
  if (mode == "equilibrium") {
    s.mode = BoundaryMode::Equilibrium;
  } else if (mode == "bias") {
    s.mode = BoundaryMode::Bias;
  } else if (mode == "ramp") {
    s.mode = BoundaryMode::Ramp;
  } else {
    throw ConfigError(P + "mode", "expected equilibrium, bias or ramp, got '" + mode + "'");
  }
  read(t, "n_bar", P, s.n_bar);
  read(t, "p_bar", P, s.p_bar);
  read(t, "V", P, s.V0);
  read(t, "U", P, s.U);
  read(t, "ramp_time", P, s.ramp_time);
  if (!(s.n_bar > 0.0)) throw ConfigError(P + "n_bar", "must be positive", "A3");
  if (!(s.p_bar > 0.0)) throw ConfigError(P + "p_bar", "must be positive", "A3");
  if (s.mode == BoundaryMode::Ramp && !(s.ramp_time > 0.0)) throw ConfigError(P + "ramp_time", "ramp mode needs ramp_time > 0");
  if (s.mode != BoundaryMode::Equilibrium && t.get("V")) throw ConfigError(P + "V", "only used in equilibrium mode");
  if (s.mode == BoundaryMode::Equilibrium && (t.get("U") || t.get("ramp_time"))) {
    throw ConfigError(P + (t.get("U") ? "U" : "ramp_time"), "not used in equilibrium mode");
  }
}

void read_solver(const toml::table& t, SolverConfig& c) {
  const std::string P = "solver.";
  reject_unknown(t, P, {"dt", "dt_min", "dt_max", "newton_tol", "newton_max_iter", "gummel_tol", "gummel_max_iter",
                        "damping", "saturation_eps", "edge_density", "dt_growth", "easy_gummel_iters"});
  read(t, "dt", P, c.dt);
  read(t, "dt_min", P, c.dt_min);
  read(t, "dt_max", P, c.dt_max);
  read(t, "newton_tol", P, c.newton_tol);
  read(t, "newton_max_iter", P, c.newton_max_iter);
  read(t, "gummel_tol", P, c.gummel_tol);
  read(t, "gummel_max_iter", P, c.gummel_max_iter);
  read(t, "damping", P, c.damping);
  read(t, "saturation_eps", P, c.saturation_eps);
  read(t, "dt_growth", P, c.dt_growth);
  read(t, "easy_gummel_iters", P, c.easy_gummel_iters);
  std::string kind;
  read(t, "edge_density", P, kind);
  if (!kind.empty()) {
    try {
      c.edge_density = edge_density_from_string(kind);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(P + "edge_density", e.what());
    }
  }
}

void read_output(const toml::table& t, Scenario& s) {
  const std::string P = "output.";
  reject_unknown(t, P, {"directory", "dump_times", "ceiling_factor", "write_states"});
  read(t, "directory", P, s.output_dir);
  if (const toml::node* d = t.get("dump_times")) s.dump_times = numbers(*d, P + "dump_times");
  read(t, "ceiling_factor", P, s.ceiling_factor);
  read(t, "write_states", P, s.write_states);
  if (!(s.ceiling_factor > 0.0)) throw ConfigError(P + "ceiling_factor", "must be positive");
}

// key=value with a dotted key; the value is TOML (bare words are taken as strings).
void assign(toml::table& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like section.key=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  toml::table parsed;
  try {
    parsed = toml::parse("v = " + text);
  } catch (const toml::parse_error&) {
    parsed = toml::table{{"v", text}};
  }
  toml::table* t = &doc;
  std::size_t start = 0;
  for (std::size_t dot; (dot = key.find('.', start)) != std::string::npos; start = dot + 1) {
    const std::string part = key.substr(start, dot - start);
    toml::node* child = t->get(part);
    if (!child) child = &t->insert_or_assign(part, toml::table{}).first->second;
    if (!child->is_table()) throw ConfigError(key, "'" + part + "' is not a table");
    t = child->as_table();
  }
  t->insert_or_assign(key.substr(start), *parsed.get("v"));
}

Scenario interpret(const toml::table& doc, const std::filesystem::path& base_dir) {
  Scenario s;
  s.base_dir = base_dir;
  reject_unknown(doc, "", {"name", "device", "boundary", "solver", "output"});
  read(doc, "name", "", s.name);
  const toml::table* device = subtable(doc, "device", "device");
  if (!device) throw ConfigError("device", "missing [device] table");
  read_device(*device, s);
  if (const toml::table* b = subtable(doc, "boundary", "boundary")) read_boundary(*b, s);
  if (const toml::table* sv = subtable(doc, "solver", "solver")) read_solver(*sv, s.solver);
  if (const toml::table* o = subtable(doc, "output", "output")) read_output(*o, s);
  if (s.name.empty()) s.name = "scenario";
  if (s.output_dir.empty()) s.output_dir = s.name;
  return s;
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& message, std::string assumption)
    : std::runtime_error(with_assumption(field, message, assumption)),
      field_(std::move(field)),
      assumption_(std::move(assumption)) {}

const char* to_string(BoundaryMode mode) {
  switch (mode) {
    case BoundaryMode::Equilibrium: return "equilibrium";
    case BoundaryMode::Bias: return "bias";
    case BoundaryMode::Ramp: return "ramp";
  }
  return "?";
}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir,
                        const std::vector<std::string>& assignments) {
  toml::table doc;
  try {
    doc = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << e.description() << " at line " << e.source().begin.line;
    throw ConfigError("config", msg.str());
  }
  for (const auto& a : assignments) assign(doc, a);
  return interpret(doc, base_dir);
}

Scenario load_scenario(const std::filesystem::path& path) { return load_scenario(path, {}); }

Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& assignments) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str(), path.parent_path().empty() ? "." : path.parent_path(), assignments);
  if (s.name == "scenario") s.name = path.stem().string();
  if (s.output_dir == "scenario") s.output_dir = s.name;
  return s;
}

void apply_overrides(Scenario& s, const Overrides& o) {
  if (o.seed) s.seed = *o.seed;
  if (o.dt) {
    s.solver.dt = *o.dt;
    s.solver.dt_min = std::min(s.solver.dt_min, *o.dt);
    s.solver.dt_max = std::max(s.solver.dt_max, *o.dt);
  }
  if (o.cells) {
    if (*o.cells < 1) throw ConfigError("--cells", "must be positive");
    // 2D keeps the aspect ratio of the cell grid
    if (s.geometry.dimension == 2) {
      s.geometry.cells_y = std::max(1, static_cast<int>(std::lround(static_cast<double>(s.geometry.cells_y) *
                                                                     *o.cells / s.geometry.cells_x)));
    }
    s.geometry.cells_x = *o.cells;
  }
  if (o.tend) s.final_time = *o.tend;
}

BoundaryData boundary_data(const Scenario& s, const DeviceMesh& mesh, double U) {
  if (s.mode == BoundaryMode::Equilibrium) {
    return BoundaryData::from_densities(Profile::constant(s.n_bar), Profile::constant(s.p_bar),
                                        Profile::constant(s.V0));
  }
  // V_bar = 0 on the first contact and U on the second, affine in between.
  const auto& contacts = s.geometry.contacts;
  if (contacts.size() != 2) {
    throw ConfigError("device.contacts", std::string(to_string(s.mode)) + " mode needs exactly two contacts");
  }
  auto coordinate = [&](Side side) {
    switch (side) {
      case Side::Left: return 0.0;
      case Side::Right: return mesh.length();
      case Side::Bottom: return 0.0;
      case Side::Top: return mesh.height();
    }
    return 0.0;
  };
  const Side a = contacts[0].side, b = contacts[1].side;
  const bool along_x = (a == Side::Left && b == Side::Right) || (a == Side::Right && b == Side::Left);
  const bool along_y = (a == Side::Bottom && b == Side::Top) || (a == Side::Top && b == Side::Bottom);
  if (!along_x && !along_y) {
    throw ConfigError("device.contacts", std::string(to_string(s.mode)) + " mode needs the two contacts on opposite sides");
  }
  const double c0 = coordinate(a), c1 = coordinate(b);
  const double slope = U / (c1 - c0);
  const Profile V = along_x ? Profile::linear(-slope * c0, slope, 0.0) : Profile::linear(-slope * c0, 0.0, slope);
  return BoundaryData::from_densities(Profile::constant(s.n_bar), Profile::constant(s.p_bar), V);
}

Setup build_setup(const Scenario& s) {
  Setup out;
  if (s.geometry.contacts.empty()) {
    throw ConfigError("device.contacts", "no contacts, the Dirichlet boundary has measure zero", "A1");
  }
  try {
    out.mesh = build_mesh(s.geometry);
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const bool about_contacts = msg.find("contact") != std::string::npos || msg.find("Dirichlet") != std::string::npos;
    throw ConfigError(about_contacts ? "device.contacts" : "device", msg, assumption_in(msg));
  }
  try {
    s.solver.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.substr(0, msg.find(' ')), msg);
  }

  out.params.lambda = s.lambda;
  out.params.final_time = s.final_time;
  try {
    out.params.doping = s.doping.at_cells(out.mesh);
    out.params.validate(out.mesh);
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const std::string field = msg.find("lambda") != std::string::npos       ? "device.lambda"
                              : msg.find("final_time") != std::string::npos ? "device.final_time"
                                                                            : "device.doping";
    throw ConfigError(field, msg, assumption_in(msg));
  }

  const double U_start = s.mode == BoundaryMode::Ramp ? 0.0 : s.U;
  try {
    out.bc0 = extend(boundary_data(s, out.mesh, U_start), out.mesh);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("boundary", e.what(), assumption_in(e.what()));
  }
  if (s.mode == BoundaryMode::Ramp) {
    struct Cache {
      double t = -1.0;
      BoundaryExtension ext;
    };
    auto cache = std::make_shared<Cache>();
    auto mesh = std::make_shared<DeviceMesh>(out.mesh);
    const Scenario scenario = s;
    out.boundary = [cache, mesh, scenario](double t) -> const BoundaryExtension& {
      if (t != cache->t) {
        const double U = scenario.U * std::min(1.0, t / scenario.ramp_time);
        cache->ext = extend(boundary_data(scenario, *mesh, U), *mesh);
        cache->t = t;
      }
      return cache->ext;
    };
  } else {
    auto ext = std::make_shared<BoundaryExtension>(out.bc0);
    out.boundary = [ext](double) -> const BoundaryExtension& { return *ext; };
  }

  const int m = out.mesh.num_cells();
  CellField n = s.n0.from_boundary ? out.bc0.n_bar : s.n0.profile.at_cells(out.mesh);
  CellField p = s.p0.from_boundary ? out.bc0.p_bar : s.p0.profile.at_cells(out.mesh);
  CellField D = s.D0.from_boundary ? CellField::Constant(m, 0.5) : s.D0.profile.at_cells(out.mesh);
  if (s.perturbation > 0.0) {
    std::mt19937_64 rng(s.seed);
    auto factor = [&] { return 1.0 + s.perturbation * (2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0); };
    for (int K = 0; K < m; ++K) {
      n[K] *= factor();
      p[K] *= factor();
      D[K] *= factor();
    }
  }
  const InitialDataReport report = validate_initial_data(n, p, D, out.mesh, out.bc0, out.params, s.solver.saturation_eps);
  if (!report.accepted()) {
    const AssumptionViolation& v = report.violations.front();
    const std::string field = v.field == "n0" ? "device.initial.n" : v.field == "p0" ? "device.initial.p" : "device.initial.D";
    std::string msg = v.message;
    if (!v.cells.empty()) {
      msg += " (cells";
      for (std::size_t i = 0; i < std::min<std::size_t>(v.cells.size(), 8); ++i) msg += " " + std::to_string(v.cells[i]);
      if (v.cells.size() > 8) msg += " ...";
      msg += ")";
    }
    throw ConfigError(field, msg, v.assumption);
  }
  out.initial = *report.state;
  out.mean_D0 = report.mean_D;
  return out;
}

}  // namespace memristor
