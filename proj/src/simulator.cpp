#include "smpc/simulator.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "smpc/analysis.hpp"
#include "smpc/assignment.hpp"

namespace smpc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require_finite(const std::vector<Vector>& x, long k) {
  for (std::size_t i = 0; i < x.size(); ++i)
    for (double v : x[i])
      if (!std::isfinite(v)) {
        throw NumericalError("non-finite state for agent " + std::to_string(i) + " at step " +
                                 std::to_string(k),
                             ErrorKind::NumericalBreakdown);
      }
}

}  // namespace

double TrajectoryLog::total_raw_energy() const {
  double s = 0.0;
  for (const auto& r : records) s += r.raw_energy;
  return s;
}

double TrajectoryLog::total_deviation_energy() const {
  double s = 0.0;
  for (const auto& r : records) s += r.deviation_energy;
  return s;
}

Simulator::Simulator(const FleetModel& model) : model_(model) {}

bool Simulator::snapshots_enabled() const {
  switch (model_.scenario().snapshots) {
    case SnapshotPolicy::On:
      return true;
    case SnapshotPolicy::Off:
      return false;
    case SnapshotPolicy::Auto:
      break;
  }
  return model_.agents() <= 64;
}

SimState Simulator::initial_state() const {
  const auto& sc = model_.scenario();
  SimState s;
  s.k = 0;
  s.x = sc.x0;
  s.alpha = sc.alpha0.empty() ? ot::RealVector(sc.agents(), 1) : sc.alpha0;
  s.diagnostic_alpha.assign(sc.agents(), 1);
  return s;
}

void Simulator::apply_inputs(const SimState& state, const std::vector<Vector>& targets,
                             StepRecord& rec, SimState& next) const {
  const std::size_t n = model_.agents();
  rec.inputs.resize(n);
  next.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector u = model_.control(i, state.x[i], targets[i]);
    const Vector ubar = mpc::equilibrium_input(model_.law(i), targets[i]);
    for (std::size_t d = 0; d < u.size(); ++d) {
      rec.raw_energy += u[d] * u[d];
      rec.deviation_energy += (u[d] - ubar[d]) * (u[d] - ubar[d]);
    }
    next.x[i] = model_.advance(i, state.x[i], u);
    rec.inputs[i] = std::move(u);
  }
  rec.targets = targets;
  next.k = state.k + 1;
  require_finite(next.x, next.k);
}

void Simulator::fill_diagnostics(StepRecord& rec, SimState& next,
                                 std::vector<std::string>* warnings) const {
  analysis::EntropicCost e;
  try {
    e = analysis::entropic_cost(model_, rec.states, 1e-10, next.diagnostic_alpha);
  } catch (const ot::NonConvergenceError& err) {
    // Very sharp kernels can stall short of 1e-10; report the best iterate.
    e.coupling = err.best().coupling;
    e.iterations = err.best().iterations;
    e.value = analysis::entropic_cost_at(model_.cost_matrix(rec.states), e.coupling);
    if (warnings) {
      warnings->push_back("step " + std::to_string(rec.k) + " diagnostics: " + err.what());
    }
  }
  rec.entropic_cost = e.value;
  rec.residual = analysis::equilibrium_residual_at(model_, rec.states, e.coupling).residual;
  next.diagnostic_alpha = e.coupling.scaling.alpha;
}

SimState Simulator::step(const SimState& state, StepRecord* record,
                         std::vector<std::string>* warnings) const {
  const auto& sc = model_.scenario();
  StepRecord local;
  StepRecord& rec = record ? *record : local;
  rec = StepRecord{};
  rec.k = state.k;
  rec.states = state.x;

  const auto kernel = model_.kernel_at(state.x);
  const auto t0 = Clock::now();
  ot::SinkhornResult sol;
  try {
    sol = ot::sinkhorn_solve(kernel, sc.marginals, state.alpha, sc.schedule);
  } catch (const ot::NonConvergenceError& e) {
    sol = e.best();
    if (warnings) {
      warnings->push_back("step " + std::to_string(state.k) + ": " + e.what() +
                          "; continuing with the best coupling");
    }
  }
  rec.sinkhorn_seconds = seconds_since(t0);
  rec.iterations = sol.iterations;
  rec.violation = static_cast<double>(sol.violation);

  const auto targets = navigate(sc.navigator, sol.coupling, sc.targets, sc.marginals.a);

  SimState next;
  next.diagnostic_alpha = state.diagnostic_alpha;
  if (sc.diagnostics) fill_diagnostics(rec, next, warnings);
  apply_inputs(state, targets, rec, next);
  next.alpha = sol.coupling.scaling.alpha;
  if (snapshots_enabled()) rec.snapshot = sol.coupling;
  next.last_coupling = std::move(sol.coupling);
  return next;
}

TrajectoryLog Simulator::run() const {
  TrajectoryLog log;
  SimState s = initial_state();
  const long steps = model_.scenario().step_count;
  log.records.reserve(static_cast<std::size_t>(steps));
  for (long k = 0; k < steps; ++k) {
    log.records.emplace_back();
    s = step(s, &log.records.back(), &log.warnings);
  }
  log.final_state = std::move(s);
  return log;
}

TrajectoryLog Simulator::run_baseline(bool recompute) const {
  const auto& sc = model_.scenario();
  const std::size_t n = sc.agents();
  if (sc.targets.size() != n) throw DimensionError("assignment baselines need N == M");
  const ot::Real uniform = ot::Real(1) / n;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(sc.marginals.a[i] - uniform) > 1e-15L ||
        std::fabs(sc.marginals.b[i] - uniform) > 1e-15L) {
      throw ParameterError("assignment baselines need uniform marginals");
    }
  }

  TrajectoryLog log;
  SimState s = initial_state();
  std::vector<std::size_t> sigma;
  const long steps = sc.step_count;
  log.records.reserve(static_cast<std::size_t>(steps));
  for (long k = 0; k < steps; ++k) {
    log.records.emplace_back();
    StepRecord& rec = log.records.back();
    rec.k = k;
    rec.states = s.x;
    if (k == 0 || recompute) {
      const auto c = model_.cost_matrix(s.x);
      const auto t0 = Clock::now();
      auto a = hungarian(c);
      rec.hungarian_seconds = seconds_since(t0);
      rec.assignment_changed = k > 0 && a.sigma != sigma;
      sigma = std::move(a.sigma);
    }
    rec.assignment = sigma;
    std::vector<Vector> targets(n);
    for (std::size_t i = 0; i < n; ++i) targets[i] = sc.targets[sigma[i]];

    SimState next;
    next.diagnostic_alpha = s.diagnostic_alpha;
    if (sc.diagnostics) fill_diagnostics(rec, next, &log.warnings);
    apply_inputs(s, targets, rec, next);
    next.alpha = s.alpha;
    s = std::move(next);
  }
  log.final_state = std::move(s);
  return log;
}

TrajectoryLog Simulator::run_baseline_permutation() const { return run_baseline(true); }

TrajectoryLog Simulator::run_baseline_fixed() const { return run_baseline(false); }

}  // namespace smpc
