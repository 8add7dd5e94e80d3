#include "smpc/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "smpc/analysis.hpp"
#include "smpc/assignment.hpp"

namespace smpc::exp {

namespace {

using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void resize_source(io::PointSource& p, std::size_t n, const char* what) {
  using K = io::PointSource::Kind;
  if (p.kind != K::UniformBox && p.kind != K::Linspace) {
    throw ParameterError(std::string("bench template ") + what +
                         " must be uniform_box or linspace to scale with N");
  }
  p.count = n;
}

}  // namespace

const char* to_string(RunMode mode) noexcept {
  switch (mode) {
    case RunMode::Sinkhorn:
      return "sinkhorn";
    case RunMode::HungarianBaseline:
      return "hungarian-baseline";
    case RunMode::FixedBaseline:
      return "fixed-baseline";
  }
  return "?";
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectories(const TrajectoryLog& log, const fs::path& path) {
  auto out = open_out(path);
  const std::size_t dim = log.final_state.x.empty() ? 0 : log.final_state.x.front().size();
  const std::size_t udim = log.records.empty() || log.records.front().inputs.empty()
                               ? dim
                               : log.records.front().inputs.front().size();
  out << "step,agent";
  for (std::size_t d = 0; d < dim; ++d) out << ",x" << d;
  for (std::size_t d = 0; d < udim; ++d) out << ",u" << d;
  for (std::size_t d = 0; d < dim; ++d) out << ",xtmp" << d;
  out << '\n';
  for (const auto& r : log.records) {
    for (std::size_t i = 0; i < r.states.size(); ++i) {
      out << r.k << ',' << i;
      for (double v : r.states[i]) out << ',' << format_real(v);
      for (double v : r.inputs[i]) out << ',' << format_real(v);
      for (double v : r.targets[i]) out << ',' << format_real(v);
      out << '\n';
    }
  }
  // final state: no input or target was applied from it
  const long last = log.final_state.k;
  for (std::size_t i = 0; i < log.final_state.x.size(); ++i) {
    out << last << ',' << i;
    for (double v : log.final_state.x[i]) out << ',' << format_real(v);
    for (std::size_t d = 0; d < udim + dim; ++d) out << ",nan";
    out << '\n';
  }
  close_out(out, path);
}

void write_metrics(const TrajectoryLog& log, const fs::path& path) {
  auto out = open_out(path);
  out << "step,iterations,marginal_violation,entropic_cost,residual,input_energy,"
         "deviation_energy,assignment_changed\n";
  for (const auto& r : log.records) {
    out << r.k << ',' << r.iterations << ',' << format_real(r.violation) << ','
        << format_real(r.entropic_cost) << ',' << format_real(r.residual) << ','
        << format_real(r.raw_energy) << ',' << format_real(r.deviation_energy) << ','
        << (r.assignment_changed ? 1 : 0) << '\n';
  }
  close_out(out, path);
}

void write_couplings(const TrajectoryLog& log, const fs::path& path) {
  auto out = open_out(path);
  out << "step,agent,target,p\n";
  for (const auto& r : log.records) {
    if (!r.snapshot) continue;
    const auto& p = *r.snapshot;
    for (std::size_t i = 0; i < p.rows; ++i)
      for (std::size_t j = 0; j < p.cols; ++j)
        out << r.k << ',' << i << ',' << j << ',' << format_real(static_cast<double>(p(i, j)))
            << '\n';
  }
  close_out(out, path);
}

void write_summary(const RunSummary& s, const fs::path& path) {
  nlohmann::json j;
  j["name"] = s.name;
  j["mode"] = to_string(s.mode);
  j["agents"] = s.agents;
  j["steps"] = s.steps;
  j["epsilon"] = s.epsilon;
  j["total_raw_energy"] = s.total_raw_energy;
  j["total_deviation_energy"] = s.total_deviation_energy;
  j["final_residual"] = s.final_residual;
  j["iterations_series"] = "metrics.csv";
  if (s.mode == RunMode::Sinkhorn) {
    j["first_step_iterations"] = s.first_step_iterations;
    j["total_sinkhorn_iterations"] = s.total_sinkhorn_iterations;
    j["sinkhorn_seconds_per_iteration"] = s.sinkhorn_seconds_per_iteration;
  } else {
    j["hungarian_seconds_per_solve"] = s.hungarian_seconds_per_solve;
    j["assignment_changes"] = s.assignment_changes;
  }
  j["warnings"] = s.warnings;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  close_out(out, path);
}

RunResult run_experiment(const io::ScenarioFile& file, RunMode mode,
                         const std::optional<fs::path>& out_dir) {
  const FleetModel model(io::materialize(file));
  const Simulator sim(model);
  RunResult res;
  switch (mode) {
    case RunMode::Sinkhorn:
      res.log = sim.run();
      break;
    case RunMode::HungarianBaseline:
      res.log = sim.run_baseline_permutation();
      break;
    case RunMode::FixedBaseline:
      res.log = sim.run_baseline_fixed();
      break;
  }

  RunSummary& s = res.summary;
  s.name = file.name;
  s.mode = mode;
  s.agents = model.agents();
  s.steps = model.scenario().step_count;
  s.epsilon = model.scenario().epsilon;
  s.total_raw_energy = res.log.total_raw_energy();
  s.total_deviation_energy = res.log.total_deviation_energy();
  s.warnings = res.log.warnings;
  double sinkhorn_time = 0.0;
  double hungarian_time = 0.0;
  long hungarian_solves = 0;
  for (const auto& r : res.log.records) {
    s.total_sinkhorn_iterations += r.iterations;
    sinkhorn_time += r.sinkhorn_seconds;
    if (!r.assignment.empty() && (r.k == 0 || mode == RunMode::HungarianBaseline)) {
      hungarian_time += r.hungarian_seconds;
      ++hungarian_solves;
    }
    if (r.assignment_changed) ++s.assignment_changes;
  }
  if (!res.log.records.empty()) s.first_step_iterations = res.log.records.front().iterations;
  if (s.total_sinkhorn_iterations > 0) {
    s.sinkhorn_seconds_per_iteration = sinkhorn_time / static_cast<double>(s.total_sinkhorn_iterations);
  }
  if (hungarian_solves > 0) s.hungarian_seconds_per_solve = hungarian_time / static_cast<double>(hungarian_solves);
  try {
    s.final_residual = analysis::equilibrium_residual(model, res.log.final_state.x).residual;
  } catch (const ot::NonConvergenceError& e) {
    s.final_residual =
        analysis::equilibrium_residual_at(model, res.log.final_state.x, e.best().coupling).residual;
    s.warnings.push_back(std::string("final residual: ") + e.what());
  }

  if (out_dir) {
    write_trajectories(res.log, *out_dir / "trajectories.csv");
    write_metrics(res.log, *out_dir / "metrics.csv");
    write_summary(s, *out_dir / "summary.json");
    const auto& recs = res.log.records;
    if (std::any_of(recs.begin(), recs.end(), [](const auto& r) { return r.snapshot.has_value(); }))
      write_couplings(res.log, *out_dir / "couplings.csv");
  }
  return res;
}

std::vector<analysis::SweepRow> run_sweep(const io::ScenarioFile& file,
                                          const std::vector<double>& grid,
                                          const std::optional<fs::path>& out_dir) {
  const FleetScenario sc = io::materialize(file);
  auto rows = analysis::epsilon_sweep(sc, grid);
  if (out_dir) {
    const fs::path path = *out_dir / "sweep.csv";
    auto out = open_out(path);
    out << "epsilon,ok,steady,residual,iterations,blur,steps";
    for (std::size_t i = 0; i < sc.agents(); ++i)
      for (std::size_t d = 0; d < sc.state_dim(); ++d) out << ",x" << i << '_' << d;
    out << ",error\n";
    for (const auto& r : rows) {
      out << format_real(r.epsilon) << ',' << (r.ok ? 1 : 0) << ',' << (r.steady ? 1 : 0) << ','
          << format_real(r.residual) << ',' << r.iterations << ',' << format_real(r.blur) << ','
          << r.steps;
      for (std::size_t i = 0; i < sc.agents(); ++i)
        for (std::size_t d = 0; d < sc.state_dim(); ++d)
          out << ',' << (r.ok ? format_real(r.steady_state[i][d]) : std::string("nan"));
      std::string msg = r.error;
      std::replace_if(msg.begin(), msg.end(), [](char c) { return c == ',' || c == '\n' || c == '"'; }, ';');
      out << ',' << msg << '\n';
    }
    close_out(out, path);
  }
  return rows;
}

std::vector<BenchRow> run_bench(const io::ScenarioFile& tmpl, const std::vector<std::size_t>& sizes,
                                const std::vector<double>& epsilons, BenchOptions options,
                                const std::optional<fs::path>& out_dir) {
  if (sizes.empty() || epsilons.empty()) throw ParameterError("bench needs sizes and epsilons");
  for (double e : epsilons)
    if (!(e > 0.0)) throw ParameterError("bench epsilons must be positive");
  if (options.timing_repeats < 1) throw ParameterError("timing repeats must be positive");

  std::vector<BenchRow> rows;
  for (std::size_t n : sizes) {
    if (n == 0) throw ParameterError("bench sizes must be positive");
    io::ScenarioFile f = tmpl;
    f.agents = n;
    f.dynamics.resize(1);
    f.marginal_a.reset();
    f.marginal_b.reset();
    f.alpha0.clear();
    resize_source(f.targets, n, "targets");
    resize_source(f.initial_states, n, "initial_states");
    f.steps = 0;
    f.diagnostics = false;

    double hungarian_seconds = std::nan("");
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      f.epsilon = epsilons[e];
      const FleetModel model(io::materialize(f));
      const auto cost = model.cost_matrix(model.scenario().x0);
      if (e == 0 && options.hungarian) {
        const auto t0 = Clock::now();
        const auto a = hungarian(cost);
        hungarian_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        (void)a;
      }
      const auto kernel = ot::gibbs_kernel(cost, f.epsilon);
      const auto& marg = model.scenario().marginals;
      const ot::RealVector ones(n, 1);

      BenchRow row;
      row.agents = n;
      row.epsilon = f.epsilon;
      row.hungarian_seconds = hungarian_seconds;
      row.s0_iterations =
          ot::sinkhorn_solve(kernel, marg, ones, ot::MarginalTolerance{options.threshold, 100'000})
              .iterations;

      std::vector<double> times;
      ot::RealVector alpha = ones;
      for (int r = 0; r < options.timing_repeats; ++r) {
        const auto t0 = Clock::now();
        auto s = ot::sinkhorn_step(kernel, marg, alpha);
        times.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
        alpha = std::move(s.alpha);
      }
      row.sinkhorn_iteration_seconds = median(times);
      rows.push_back(row);
    }
  }

  if (out_dir) {
    const fs::path path = *out_dir / "bench.csv";
    auto out = open_out(path);
    out << "N,epsilon,sinkhorn_iter_seconds,s0_iterations,hungarian_seconds\n";
    for (const auto& r : rows) {
      out << r.agents << ',' << format_real(r.epsilon) << ','
          << format_real(r.sinkhorn_iteration_seconds) << ',' << r.s0_iterations << ','
          << format_real(r.hungarian_seconds) << '\n';
    }
    close_out(out, path);
  }
  return rows;
}

}  // namespace smpc::exp
