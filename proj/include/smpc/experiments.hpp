#pragma once

// Run orchestration and the CSV/JSON artifacts written by the command line.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smpc/scenario_io.hpp"
#include "smpc/simulator.hpp"
#include "smpc/sweep.hpp"

namespace smpc::exp {

enum class RunMode { Sinkhorn, HungarianBaseline, FixedBaseline };

const char* to_string(RunMode mode) noexcept;

struct RunSummary {
  std::string name;
  RunMode mode = RunMode::Sinkhorn;
  std::size_t agents = 0;
  long steps = 0;
  double epsilon = 0.0;
  double total_raw_energy = 0.0;
  double total_deviation_energy = 0.0;
  double final_residual = 0.0;
  long first_step_iterations = 0;
  long total_sinkhorn_iterations = 0;
  double sinkhorn_seconds_per_iteration = 0.0;
  double hungarian_seconds_per_solve = 0.0;
  long assignment_changes = 0;
  std::vector<std::string> warnings;
};

struct RunResult {
  TrajectoryLog log;
  RunSummary summary;
};

/// Simulates the scenario in the given mode. When out_dir is set, writes
/// trajectories.csv, metrics.csv and summary.json there.
RunResult run_experiment(const io::ScenarioFile& file, RunMode mode,
                         const std::optional<std::filesystem::path>& out_dir);

void write_trajectories(const TrajectoryLog& log, const std::filesystem::path& path);
void write_metrics(const TrajectoryLog& log, const std::filesystem::path& path);
/// step,agent,target,p for every step that kept a coupling snapshot.
void write_couplings(const TrajectoryLog& log, const std::filesystem::path& path);
void write_summary(const RunSummary& s, const std::filesystem::path& path);

/// epsilon_sweep over the grid, written to sweep.csv when out_dir is set.
std::vector<analysis::SweepRow> run_sweep(const io::ScenarioFile& file,
                                          const std::vector<double>& grid,
                                          const std::optional<std::filesystem::path>& out_dir);

struct BenchRow {
  std::size_t agents = 0;
  double epsilon = 0.0;
  double sinkhorn_iteration_seconds = 0.0;  // median over timed single iterations
  long s0_iterations = 0;                   // first-step count under the 0.005 criterion
  double hungarian_seconds = 0.0;           // one solve on the same cost matrix
};

struct BenchOptions {
  int timing_repeats = 7;
  double threshold = 0.005;
  bool hungarian = true;
};

/// For every N, regenerates the template's point sources at size N, builds
/// the cost matrix at the initial states and measures Sinkhorn and Hungarian.
/// The template's targets and initial states must be uniform_box or linspace.
std::vector<BenchRow> run_bench(const io::ScenarioFile& tmpl, const std::vector<std::size_t>& sizes,
                                const std::vector<double>& epsilons, BenchOptions options,
                                const std::optional<std::filesystem::path>& out_dir);

/// Formats with 17 significant digits.
std::string format_real(double v);

}  // namespace smpc::exp
