#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "smpc/fleet.hpp"

namespace smpc {

struct SimState {
  long k = 0;
  std::vector<Vector> x;
  ot::RealVector alpha;  // warm start for the next step
  std::optional<ot::Coupling> last_coupling;
  ot::RealVector diagnostic_alpha;  // warm start for the tight diagnostic solve
};

struct StepRecord {
  long k = 0;
  std::vector<Vector> states;   // x[k]
  std::vector<Vector> inputs;   // u[k]
  std::vector<Vector> targets;  // temporary targets used at step k
  long iterations = 0;
  double violation = 0.0;
  std::optional<ot::Coupling> snapshot;
  double raw_energy = 0.0;        // sum_i |u_i|^2
  double deviation_energy = 0.0;  // sum_i |u_i - ubar_i|^2, ubar_i holds the step's target
  double entropic_cost = std::nan("");
  double residual = std::nan("");
  std::vector<std::size_t> assignment;  // baselines only
  bool assignment_changed = false;
  double hungarian_seconds = 0.0;
  double sinkhorn_seconds = 0.0;
};

struct TrajectoryLog {
  std::vector<StepRecord> records;
  SimState final_state;
  std::vector<std::string> warnings;

  double total_raw_energy() const;
  double total_deviation_energy() const;
};

class Simulator {
 public:
  explicit Simulator(const FleetModel& model);

  SimState initial_state() const;

  /// One Sinkhorn MPC step: kernel at x, S sinkhorn iterations from the
  /// carried alpha, barycentric targets, MPC inputs, state update.
  SimState step(const SimState& state, StepRecord* record = nullptr,
                std::vector<std::string>* warnings = nullptr) const;

  TrajectoryLog run() const;
  /// Hungarian assignment recomputed every step.
  TrajectoryLog run_baseline_permutation() const;
  /// Assignment fixed at k = 0.
  TrajectoryLog run_baseline_fixed() const;

 private:
  TrajectoryLog run_baseline(bool recompute) const;
  void apply_inputs(const SimState& state, const std::vector<Vector>& targets, StepRecord& rec,
                    SimState& next) const;
  void fill_diagnostics(StepRecord& rec, SimState& next, std::vector<std::string>* warnings) const;
  bool snapshots_enabled() const;

  const FleetModel& model_;
};

}  // namespace smpc
