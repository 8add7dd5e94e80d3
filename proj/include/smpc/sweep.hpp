#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "smpc/fleet.hpp"

namespace smpc::analysis {

struct SweepRow {
  double epsilon = 0.0;
  bool ok = false;
  std::string error;
  std::vector<Vector> steady_state;
  double residual = std::nan("");
  long iterations = 0;   // Sinkhorn iterations summed over the run
  double blur = std::nan("");  // max |P* - a b^T| at the steady state
  long steps = 0;        // steps simulated before the steady-state test fired
  bool steady = false;
};

struct SteadyStateRule {
  double displacement = 1e-9;  // max_i |x_i[k+1] - x_i[k]|
  int consecutive = 10;
};

/// One closed-loop run per epsilon (ascending grid). A run stops when the
/// rule holds or the scenario step count is exhausted. Failures are recorded
/// per row and the sweep continues.
std::vector<SweepRow> epsilon_sweep(const FleetScenario& scenario, const std::vector<double>& grid,
                                    SteadyStateRule rule = {});

struct DecayRow {
  double epsilon = 0.0;
  bool converged = false;
  std::string error;
  std::vector<Vector> equilibrium;
  double state_distance = std::nan("");     // |x^e - x^d(sigma)|
  double coupling_distance = std::nan("");  // max |P*(x^e) - P^sigma|
  long fixed_point_iterations = 0;
};

struct DecayTable {
  std::vector<DecayRow> rows;
  /// Least-squares slope of log(state_distance) against 1/eps over the
  /// converged rows.
  double slope = std::nan("");
};

/// Equilibria near the assignment sigma for a descending grid, found by the
/// damped iteration x <- (1 - w) x + w h(x) from x^d(sigma), where h maps a
/// fleet state to its barycentric targets at the converged coupling.
DecayTable exponential_equilibrium_check(const FleetScenario& scenario,
                                         const std::vector<std::size_t>& sigma,
                                         const std::vector<double>& grid, double damping = 0.5,
                                         double tolerance = 1e-13, long max_iterations = 20'000);

/// Least-squares slope of y against x.
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace smpc::analysis
