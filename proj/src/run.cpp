#include "memristor/run.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

namespace memristor {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_state(const fs::path& path, const SystemState& s, const DeviceMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const bool two_d = mesh.dimension() == 2;
  out << (two_d ? "cell_id,x,y,n,p,D,V,phi_n,phi_p,phi_D\n" : "cell_id,x,n,p,D,V,phi_n,phi_p,phi_D\n");
  for (int K = 0; K < mesh.num_cells(); ++K) {
    const Point& c = mesh.cells()[static_cast<std::size_t>(K)].centroid;
    out << K << ',' << fmt(c.x());
    if (two_d) out << ',' << fmt(c.y());
    for (const CellField* f : {&s.n, &s.p, &s.D, &s.V, &s.phi_n, &s.phi_p, &s.phi_D}) out << ',' << fmt((*f)[K]);
    out << '\n';
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t pos; (pos = s.find(sep, start)) != std::string::npos; start = pos + 1) out.push_back(s.substr(start, pos - start));
  out.push_back(s.substr(start));
  return out;
}

}  // namespace

fs::path output_root() {
  const char* root = std::getenv("MEMRISTOR_OUTPUT_ROOT");
  return root && *root ? fs::path(root) : fs::current_path();
}

fs::path output_directory(const Scenario& scenario) {
  const fs::path dir(scenario.output_dir);
  return dir.is_absolute() ? dir : output_root() / dir;
}

InequalityOptions inequality_options(const DerivedConstants& constants, double domain_measure, double newton_tol) {
  InequalityOptions o;
  o.slack = 10.0 * newton_tol;
  const double C = constants.get("trunc_energy");
  o.c1 = C;
  o.c = 2.0 * (1.0 + C) * domain_measure;
  return o;
}

RunResult run_scenario(const Scenario& scenario, const fs::path& directory, const DerivedConstants& constants) {
  const Setup setup = build_setup(scenario);
  RunResult result;
  result.directory = directory;
  result.initial = setup.initial;
  fs::create_directories(directory);
  const fs::path states_dir = directory / "states";
  if (scenario.write_states) fs::create_directories(states_dir);

  std::ofstream log(directory / "steps.csv");
  if (!log) throw std::runtime_error("cannot write " + (directory / "steps.csv").string());
  log << kStepLogHeader << '\n';

  const double T = scenario.final_time;
  std::vector<double> dump_times;
  for (double t : scenario.dump_times) {
    if (t >= 0.0 && t <= T) dump_times.push_back(t);
  }
  std::sort(dump_times.begin(), dump_times.end());
  const double t_tol = 1e-12 * std::max(1.0, T);
  auto wanted = [&](double t) {
    if (t == 0.0 || std::abs(t - T) <= t_tol) return true;
    return std::any_of(dump_times.begin(), dump_times.end(), [&](double d) { return std::abs(d - t) <= t_tol; });
  };
  nlohmann::json dumps = nlohmann::json::array();
  std::ofstream index;
  if (scenario.write_states) {
    index.open(states_dir / "index.csv");
    index << "file,t\n";
  }

  int step = 0;
  TransientOptions options;
  options.keep_states = false;
  options.inequality = inequality_options(constants, setup.mesh.domain_measure(), scenario.solver.newton_tol);
  options.observer = [&](const TrajectoryPoint& q) {
    const EnergyReport& e = q.energy;
    log << step << ',' << fmt(e.t) << ',' << fmt(q.dt) << ',' << q.step.gummel_iters << ',' << q.step.newton_iters << ','
        << fmt(q.step.residual) << ',' << fmt(e.E) << ',' << fmt(e.dissipation) << ',' << fmt(e.mass_D) << ','
        << fmt(e.n.min) << ',' << fmt(e.n.max) << ',' << fmt(e.p.min) << ',' << fmt(e.p.max) << ',' << fmt(e.D.min)
        << ',' << fmt(e.D.max) << ',' << (e.inequality_ok ? 1 : 0) << '\n';
    result.reports.push_back(e);
    result.dt.push_back(q.dt);
    result.Lambda = std::max(result.Lambda, e.Lambda);
    if (scenario.write_states && wanted(e.t)) {
      char name[32];
      std::snprintf(name, sizeof name, "state_%04d.csv", static_cast<int>(dumps.size()));
      write_state(states_dir / name, q.state, setup.mesh);
      index << name << ',' << fmt(e.t) << '\n';
      dumps.push_back({{"file", std::string("states/") + name}, {"t", e.t}});
    }
    result.final = q.state;
    ++step;
  };

  Schedule schedule{T, dump_times};
  try {
    run_transient(setup.initial, schedule, setup.mesh, setup.boundary, setup.params, scenario.solver, options);
  } catch (const NonConvergence& e) {
    result.status = RunResult::Status::SolverFailure;
    result.message = std::string("NonConvergence: ") + e.what();
  } catch (const StepRejected& e) {
    result.status = RunResult::Status::SolverFailure;
    result.message = std::string("StepRejected: ") + e.what();
  }
  log.flush();

  // verdicts
  const bool asserted = result.Lambda == 0.0;
  int passed = 0, failed = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m < result.reports.size(); ++m) {
    (result.reports[m].inequality_ok ? passed : failed) += 1;
    worst = std::min(worst, result.reports[m].inequality_slack);
  }
  result.inequality_passed = failed == 0;
  if (result.status != RunResult::Status::Ok) {
    result.verdict = "energy_decay: incomplete (solver failure)";
  } else if (asserted) {
    result.verdict = failed == 0 ? "energy_decay: pass" : "energy_decay: fail";
  } else {
    result.verdict = "energy_decay: not asserted (Lambda > 0)";
  }

  const BoundaryExtension& bc0 = setup.bc0;
  const double ceiling_n = scenario.ceiling_factor * std::max(setup.initial.n.maxCoeff(), bc0.n_bar.maxCoeff());
  const double ceiling_p = scenario.ceiling_factor * std::max(setup.initial.p.maxCoeff(), bc0.p_bar.maxCoeff());
  result.boundedness = boundedness_monitor(result.reports, ceiling_n, ceiling_p);

  double min_n = INFINITY, min_p = INFINITY, min_D = INFINITY, max_D = -INFINITY, total_diss = 0.0;
  for (std::size_t m = 0; m < result.reports.size(); ++m) {
    const EnergyReport& e = result.reports[m];
    min_n = std::min(min_n, e.n.min);
    min_p = std::min(min_p, e.p.min);
    min_D = std::min(min_D, e.D.min);
    max_D = std::max(max_D, e.D.max);
    if (m > 0) total_diss += result.dt[m] * e.dissipation;
  }
  const EnergyReport& first = result.reports.front();
  const EnergyReport& last = result.reports.back();

  nlohmann::json j;
  j["scenario"] = scenario.name;
  j["mode"] = to_string(scenario.mode);
  j["status"] = result.status == RunResult::Status::Ok ? "ok" : "solver_failure";
  if (!result.message.empty()) j["message"] = result.message;
  j["verdict"] = result.verdict;
  j["seed"] = scenario.seed;
  j["dimension"] = setup.mesh.dimension();
  j["cells"] = setup.mesh.num_cells();
  j["steps"] = static_cast<int>(result.reports.size()) - 1;
  j["final_time"] = last.t;
  j["Lambda"] = result.Lambda;
  j["E_initial"] = first.E;
  j["E_final"] = last.E;
  j["total_dissipation"] = total_diss;
  j["mass_D_initial"] = first.mass_D;
  j["mass_D_final"] = last.mass_D;
  j["mass_D_relative_drift"] = std::abs(last.mass_D - first.mass_D) / first.mass_D;
  j["energy_inequality"] = {{"asserted", asserted},
                            {"passed", passed},
                            {"failed", failed},
                            {"worst_slack", std::isfinite(worst) ? worst : 0.0},
                            {"slack_tolerance", options.inequality.slack},
                            {"c", options.inequality.c},
                            {"c1", options.inequality.c1}};
  j["boundedness"] = {{"passed", result.boundedness.passed},
                      {"ceiling_n", ceiling_n},
                      {"ceiling_p", ceiling_p},
                      {"max_n", result.boundedness.max_n},
                      {"max_p", result.boundedness.max_p},
                      {"n_L53", result.boundedness.n_L53},
                      {"p_L53", result.boundedness.p_L53},
                      {"message", result.boundedness.message}};
  j["bounds"] = {{"min_n", min_n}, {"min_p", min_p}, {"min_D", min_D}, {"max_D", max_D}};
  j["dumps"] = dumps;
  std::ofstream(directory / "summary.json") << j.dump(2) << '\n';
  return result;
}

std::vector<SweepVariant> sweep_variants(const std::vector<std::string>& specs) {
  std::vector<SweepVariant> out{{}};
  for (const std::string& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(spec, "sweep parameter must look like section.key=v1,v2,...");
    const std::string key = spec.substr(0, eq);
    std::vector<SweepVariant> next;
    for (const SweepVariant& v : out) {
      for (const std::string& value : split(spec.substr(eq + 1), ',')) {
        SweepVariant w = v;
        w.assignments.push_back(key + "=" + value);
        w.label += (w.label.empty() ? "" : " ") + key + "=" + value;
        next.push_back(std::move(w));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::vector<SweepOutcome> run_sweep(const fs::path& config, const std::vector<SweepVariant>& variants,
                                    const Overrides& overrides, const DerivedConstants& constants, int jobs) {
  std::vector<SweepOutcome> outcomes(variants.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < variants.size();) {
      SweepOutcome& o = outcomes[i];
      o.variant = variants[i];
      try {
        Scenario s = load_scenario(config, variants[i].assignments);
        apply_overrides(s, overrides);
        o.directory = output_directory(s) / ("variant_" + std::to_string(i));
        const RunResult r = run_scenario(s, o.directory, constants);
        o.exit_code = r.status == RunResult::Status::Ok ? 0 : 2;
        o.message = r.status == RunResult::Status::Ok ? r.verdict : r.message;
        std::ofstream(o.directory / "variant.txt") << o.variant.label << '\n';
      } catch (const ConfigError& e) {
        o.exit_code = 1;
        o.message = e.what();
      } catch (const std::exception& e) {
        o.exit_code = 1;
        o.message = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(variants.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return outcomes;
}

}  // namespace memristor
