// memristor run | verify | plot | sweep
//
// Exit codes: 0 success, 1 configuration or usage error, 2 solver failure.

#include "memristor/plot.hpp"
#include "memristor/run.hpp"
#include "memristor/verification.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <thread>

namespace {

using namespace memristor;

void add_overrides(CLI::App* cmd, Overrides& o, std::vector<std::string>& sets) {
  cmd->add_option("--seed", o.seed, "seed of the initial perturbation");
  cmd->add_option("--dt", o.dt, "initial time step (widens dt_min/dt_max if needed)");
  cmd->add_option("--cells", o.cells, "cells in x (2D keeps the cell aspect ratio)");
  cmd->add_option("--tend", o.tend, "final time");
  cmd->add_option("--set", sets, "override a config key, e.g. --set boundary.U=2")->allow_extra_args(false);
}

void print_summary(const RunResult& r) {
  const auto& last = r.reports.back();
  std::printf("%zu steps to t = %.6g, E %.10g -> %.10g, Lambda = %.6g\n", r.reports.size() - 1, last.t,
              r.reports.front().E, last.E, r.Lambda);
  std::printf("%s\n", r.verdict.c_str());
  std::printf("boundedness: %s (%s)\n", r.boundedness.passed ? "pass" : "fail", r.boundedness.message.c_str());
  std::printf("output: %s\n", r.directory.string().c_str());
}

int cmd_run(const std::string& config, const Overrides& o, const std::vector<std::string>& sets,
            const std::string& output) {
  Scenario s = load_scenario(config, sets);
  apply_overrides(s, o);
  if (!output.empty()) s.output_dir = output;
  const DerivedConstants constants = DerivedConstants::load_default();
  const RunResult r = run_scenario(s, output_directory(s), constants);
  if (r.status != RunResult::Status::Ok) {
    std::fprintf(stderr, "solver failure: %s\n", r.message.c_str());
    std::fprintf(stderr, "partial output in %s\n", r.directory.string().c_str());
    return 2;
  }
  print_summary(r);
  return 0;
}

int cmd_sweep(const std::string& config, const std::vector<std::string>& params, const Overrides& o, int jobs) {
  const auto variants = sweep_variants(params);
  // fail fast on a broken base config before spawning workers
  load_scenario(config);
  const DerivedConstants constants = DerivedConstants::load_default();
  const auto outcomes = run_sweep(config, variants, o, constants, jobs);
  int code = 0;
  for (const auto& out : outcomes) {
    std::printf("[%s] %s: %s (%s)\n", out.exit_code == 0 ? "ok" : "FAIL", out.variant.label.c_str(),
                out.message.c_str(), out.directory.string().c_str());
    code = std::max(code, out.exit_code);
  }
  return code;
}

int cmd_verify(const std::string& suite, const std::string& constants_path) {
  if (suite != "all" && !verify::is_suite(suite)) {
    std::fprintf(stderr, "unknown suite '%s' (expected", suite.c_str());
    for (const auto& n : verify::suite_names()) std::fprintf(stderr, " %s", n.c_str());
    std::fprintf(stderr, " or all)\n");
    return 1;
  }
  const DerivedConstants constants =
      constants_path.empty() ? DerivedConstants::load_default() : DerivedConstants::load(constants_path);
  std::printf("derived constants: %s\n", constants_path.empty() ? DerivedConstants::default_path().c_str()
                                                                 : constants_path.c_str());
  for (const auto& line : constants.provenance()) std::printf("  %s\n", line.c_str());
  for (const auto& [name, c] : constants.all()) {
    std::printf("  %-16s %.6g (observed %.6g)\n", name.c_str(), c.value, c.observed);
  }
  std::vector<std::string> suites = suite == "all" ? verify::suite_names() : std::vector<std::string>{suite};
  bool ok = true;
  for (const auto& name : suites) {
    const auto result = verify::run_suite(name, constants);
    std::printf("\n%s", verify::format_suite(result).c_str());
    ok = ok && result.passed();
  }
  std::printf("\n%s\n", ok ? "all checks passed" : "SOME CHECKS FAILED");
  return ok ? 0 : 1;
}

int cmd_plot(const std::string& dir) {
  const auto files = plot_run(dir);
  for (const auto& f : files) std::printf("%s\n", f.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drift-diffusion memristor simulator"};
  app.require_subcommand(1);

  Overrides run_o, sweep_o;
  std::vector<std::string> run_sets, sweep_sets, run_sweep_params, sweep_params;
  std::string run_config, run_output, sweep_config, suite, constants_path, plot_dir;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto* run = app.add_subcommand("run", "run a scenario");
  run->add_option("config", run_config, "scenario TOML file")->required();
  run->add_option("--output", run_output, "output directory (relative to $MEMRISTOR_OUTPUT_ROOT)");
  run->add_option("--sweep", run_sweep_params, "sweep a key over values, e.g. --sweep boundary.U=1,2,5");
  run->add_option("--jobs", jobs, "parallel workers for --sweep");
  add_overrides(run, run_o, run_sets);

  auto* sweep = app.add_subcommand("sweep", "run a scenario over a parameter grid in parallel");
  sweep->add_option("config", sweep_config, "scenario TOML file")->required();
  sweep->add_option("--param", sweep_params, "key=v1,v2,... (repeatable, Cartesian product)")->required();
  sweep->add_option("--jobs", jobs, "parallel workers");
  add_overrides(sweep, sweep_o, sweep_sets);

  auto* ver = app.add_subcommand("verify", "run property suites");
  ver->add_option("suite", suite, "appendix-a, lemma-2-4, lemma-2-6, poincare, statistics-roundtrip or all")->required();
  ver->add_option("--constants", constants_path, "derived constants CSV");

  auto* plot = app.add_subcommand("plot", "write SVG plots of a finished run");
  plot->add_option("run_dir", plot_dir, "run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*run) {
      if (!run_sweep_params.empty()) {
        std::vector<std::string> specs = run_sweep_params;
        // --set values become single-valued sweep axes
        specs.insert(specs.end(), run_sets.begin(), run_sets.end());
        return cmd_sweep(run_config, specs, run_o, jobs);
      }
      return cmd_run(run_config, run_o, run_sets, run_output);
    }
    if (*sweep) {
      std::vector<std::string> specs = sweep_params;
      specs.insert(specs.end(), sweep_sets.begin(), sweep_sets.end());
      return cmd_sweep(sweep_config, specs, sweep_o, jobs);
    }
    if (*ver) return cmd_verify(suite, constants_path);
    if (*plot) return cmd_plot(plot_dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const PlotError& e) {
    std::fprintf(stderr, "plot error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
