#include "smpc/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smpc/analysis.hpp"
#include "smpc/simulator.hpp"

namespace smpc::analysis {

namespace {

double max_displacement(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double s = 0.0;
    for (std::size_t d = 0; d < a[i].size(); ++d) s += (a[i][d] - b[i][d]) * (a[i][d] - b[i][d]);
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

double blur_of(const ot::Coupling& p, const ot::Marginals& m) {
  ot::Real worst = 0;
  for (std::size_t i = 0; i < p.rows; ++i)
    for (std::size_t j = 0; j < p.cols; ++j)
      worst = std::max(worst, std::fabs(p(i, j) - m.a[i] * m.b[j]));
  return static_cast<double>(worst);
}

}  // namespace

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nan("");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::nan("");
}

std::vector<SweepRow> epsilon_sweep(const FleetScenario& scenario, const std::vector<double>& grid,
                                    SteadyStateRule rule) {
  if (grid.empty()) throw ParameterError("epsilon grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) {
      throw ParameterError("epsilon grid entries must be positive");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ParameterError("epsilon grid must be ascending");
  }

  std::vector<SweepRow> rows;
  for (double eps : grid) {
    SweepRow row;
    row.epsilon = eps;
    try {
      FleetScenario sc = scenario;
      sc.epsilon = eps;
      sc.diagnostics = false;
      sc.snapshots = SnapshotPolicy::Off;
      const FleetModel model(sc);
      const Simulator sim(model);
      SimState s = sim.initial_state();
      int quiet = 0;
      StepRecord rec;
      for (long k = 0; k < sc.step_count; ++k) {
        SimState next = sim.step(s, &rec);
        row.iterations += rec.iterations;
        const double move = max_displacement(next.x, s.x);
        s = std::move(next);
        row.steps = k + 1;
        quiet = move < rule.displacement ? quiet + 1 : 0;
        if (quiet >= rule.consecutive) {
          row.steady = true;
          break;
        }
      }
      EquilibriumReport rep;
      try {
        rep = equilibrium_residual(model, s.x);
      } catch (const ot::NonConvergenceError& e) {
        rep = equilibrium_residual_at(model, s.x, e.best().coupling);
        row.error = e.what();
      }
      row.residual = rep.residual;
      row.blur = blur_of(rep.coupling, sc.marginals);
      row.steady_state = s.x;
      row.ok = true;
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

DecayTable exponential_equilibrium_check(const FleetScenario& scenario,
                                         const std::vector<std::size_t>& sigma,
                                         const std::vector<double>& grid, double damping,
                                         double tolerance, long max_iterations) {
  const std::size_t n = scenario.agents();
  if (n > 6) throw Error(ErrorKind::SizeCap, "equilibrium check is limited to N <= 6");
  if (sigma.size() != n || scenario.targets.size() != n) {
    throw DimensionError("sigma must be a permutation of the N targets");
  }
  std::vector<char> seen(n, 0);
  for (auto s : sigma) {
    if (s >= n || seen[s]) throw DomainError("sigma is not a permutation");
    seen[s] = 1;
  }
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] < grid[i - 1])) throw ParameterError("epsilon grid must be descending");
  if (!(damping > 0.0 && damping <= 1.0)) throw ParameterError("damping must lie in (0, 1]");

  std::vector<Vector> xd(n);
  for (std::size_t i = 0; i < n; ++i) xd[i] = scenario.targets[sigma[i]];

  DecayTable table;
  std::vector<double> inv_eps, log_dist;
  for (double eps : grid) {
    DecayRow row;
    row.epsilon = eps;
    try {
      FleetScenario sc = scenario;
      sc.epsilon = eps;
      const FleetModel model(sc);
      std::vector<Vector> x = xd;
      ot::RealVector alpha(n, 1);
      ot::Coupling p;
      for (long it = 1; it <= max_iterations; ++it) {
        const auto k = model.kernel_at(x);
        auto r = ot::sinkhorn_solve(k, sc.marginals, alpha, ot::MarginalTolerance{1e-12, 1'000'000});
        alpha = r.coupling.scaling.alpha;
        const auto h = barycentric_targets(r.coupling, sc.targets, sc.marginals.a);
        std::vector<Vector> next(n);
        for (std::size_t i = 0; i < n; ++i) {
          next[i] = x[i];
          for (std::size_t d = 0; d < x[i].size(); ++d)
            next[i][d] = (1.0 - damping) * x[i][d] + damping * h[i][d];
        }
        const double move = max_displacement(next, x);
        x = std::move(next);
        p = std::move(r.coupling);
        row.fixed_point_iterations = it;
        if (move < tolerance) {
          row.converged = true;
          break;
        }
      }
      if (!row.converged) row.error = "fixed-point iteration did not settle";
      row.equilibrium = x;
      row.state_distance = max_displacement(x, xd);
      ot::Real worst = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const ot::Real target = j == sigma[i] ? sc.marginals.a[i] : 0;
          worst = std::max(worst, std::fabs(p(i, j) - target));
        }
      row.coupling_distance = static_cast<double>(worst);
      if (row.converged && row.state_distance > 0.0) {
        inv_eps.push_back(1.0 / eps);
        log_dist.push_back(std::log(std::max(row.state_distance, 1e-300)));
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
    table.rows.push_back(std::move(row));
  }
  table.slope = regression_slope(inv_eps, log_dist);
  return table;
}

}  // namespace smpc::analysis
