// Command-line front end. Talks to the library only through sinkhorn_mpc.h.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sinkhorn_mpc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct ScenarioDeleter {
  void operator()(smpc_scenario* s) const { smpc_scenario_free(s); }
};
using ScenarioPtr = std::unique_ptr<smpc_scenario, ScenarioDeleter>;

int report(smpc_status s) {
  if (s == SMPC_OK) return kExitOk;
  std::fprintf(stderr, "smpc: %s: %s\n", smpc_status_string(s), smpc_last_error());
  return smpc_status_is_input_error(s) ? kExitInput : kExitNumerical;
}

struct Common {
  std::string scenario;
  std::string out;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string snapshots;
};

int load(const Common& c, ScenarioPtr& out) {
  smpc_scenario* raw = nullptr;
  const smpc_status s = smpc_scenario_load(c.scenario.c_str(), &raw);
  out.reset(raw);
  if (s != SMPC_OK) return report(s);
  if (c.seed_set) smpc_scenario_set_seed(out.get(), c.seed);
  if (!c.snapshots.empty()) {
    const smpc_snapshots p = c.snapshots == "on"    ? SMPC_SNAPSHOTS_ON
                             : c.snapshots == "off" ? SMPC_SNAPSHOTS_OFF
                                                    : SMPC_SNAPSHOTS_AUTO;
    smpc_scenario_set_snapshots(out.get(), p);
  }
  return kExitOk;
}

std::string output_dir(const Common& c, const smpc_scenario* s) {
  if (!c.out.empty()) return c.out;
  size_t needed = 0;
  smpc_scenario_output_dir(s, nullptr, 0, &needed);
  std::string dir(needed, '\0');
  smpc_scenario_output_dir(s, dir.data(), dir.size(), &needed);
  dir.resize(needed - 1);
  return dir;
}

void add_common(CLI::App* cmd, Common& c, bool snapshots) {
  cmd->add_option("--scenario", c.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory (default: the scenario's output_dir)");
  cmd->add_option_function<uint64_t>(
      "--seed", [&c](const uint64_t& v) { c.seed = v, c.seed_set = true; },
      "Override the scenario RNG seed");
  if (snapshots) {
    cmd->add_option("--snapshots", c.snapshots, "Coupling snapshots")
        ->check(CLI::IsMember({"auto", "on", "off"}));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sinkhorn MPC: multi-agent assignment by warm-started entropic transport"};
  app.require_subcommand(1);
  app.set_version_flag("--version", smpc_version());

  Common run_opts;
  std::string mode = "sinkhorn";
  auto* run = app.add_subcommand("run", "Simulate a scenario and write trajectories, metrics, summary");
  add_common(run, run_opts, true);
  run->add_option("--mode", mode, "Controller")
      ->check(CLI::IsMember({"sinkhorn", "hungarian-baseline", "fixed-baseline"}));

  Common sweep_opts;
  std::vector<double> sweep_eps;
  auto* sweep = app.add_subcommand("sweep", "Steady states over an epsilon grid");
  add_common(sweep, sweep_opts, false);
  sweep->add_option("--eps", sweep_eps, "Ascending epsilon values")->required()->delimiter(',');

  Common bench_opts;
  std::vector<double> bench_eps;
  std::vector<std::size_t> bench_n;
  auto* bench = app.add_subcommand("bench", "Sinkhorn and Hungarian timings per N and epsilon");
  add_common(bench, bench_opts, false);
  bench->add_option("--N", bench_n, "Fleet sizes")->required()->delimiter(',');
  bench->add_option("--eps", bench_eps, "Epsilon values")->required()->delimiter(',');

  Common validate_opts;
  bool print_canonical = false;
  auto* validate = app.add_subcommand("validate", "Check a scenario file and build its MPC laws");
  add_common(validate, validate_opts, false);
  validate->add_flag("--canonical", print_canonical, "Print the canonical form of the file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  ScenarioPtr scenario;
  if (run->parsed()) {
    if (int rc = load(run_opts, scenario)) return rc;
    const smpc_mode m = mode == "hungarian-baseline" ? SMPC_MODE_HUNGARIAN_BASELINE
                        : mode == "fixed-baseline"   ? SMPC_MODE_FIXED_BASELINE
                                                     : SMPC_MODE_SINKHORN;
    const std::string dir = output_dir(run_opts, scenario.get());
    smpc_run_summary summary{};
    if (int rc = report(smpc_run(scenario.get(), m, dir.c_str(), &summary))) return rc;
    std::printf("%s: %zu agents, %ld steps, raw energy %.6g, final residual %.3g\n", mode.c_str(),
                summary.agents, summary.steps, summary.total_raw_energy, summary.final_residual);
    if (summary.warning_count > 0) {
      std::fprintf(stderr, "smpc: %zu warnings, see %s/summary.json\n", summary.warning_count,
                   dir.c_str());
    }
    return kExitOk;
  }

  if (sweep->parsed()) {
    if (int rc = load(sweep_opts, scenario)) return rc;
    const std::string dir = output_dir(sweep_opts, scenario.get());
    size_t failed = 0;
    if (int rc = report(smpc_sweep(scenario.get(), sweep_eps.data(), sweep_eps.size(), dir.c_str(),
                                   &failed))) {
      return rc;
    }
    std::printf("sweep: %zu epsilon values, %zu failed, wrote %s/sweep.csv\n", sweep_eps.size(),
                failed, dir.c_str());
    return kExitOk;
  }

  if (bench->parsed()) {
    if (int rc = load(bench_opts, scenario)) return rc;
    const std::string dir = output_dir(bench_opts, scenario.get());
    if (int rc = report(smpc_bench(scenario.get(), bench_n.data(), bench_n.size(), bench_eps.data(),
                                   bench_eps.size(), dir.c_str()))) {
      return rc;
    }
    std::printf("bench: wrote %s/bench.csv\n", dir.c_str());
    return kExitOk;
  }

  if (int rc = load(validate_opts, scenario)) return rc;
  if (int rc = report(smpc_validate(scenario.get()))) return rc;
  if (print_canonical) {
    size_t needed = 0;
    smpc_scenario_canonical_json(scenario.get(), nullptr, 0, &needed);
    std::string text(needed, '\0');
    smpc_scenario_canonical_json(scenario.get(), text.data(), text.size(), &needed);
    std::fputs(text.c_str(), stdout);
  } else {
    std::printf("ok\n");
  }
  return kExitOk;
}
