#include "smpc/fleet.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace smpc {

void FleetScenario::validate() const {
  const std::size_t n = agents();
  if (n == 0) throw DimensionError("scenario has no agents");
  if (systems.size() != n) {
    throw DimensionError("scenario has " + std::to_string(systems.size()) + " systems for " +
                         std::to_string(n) + " agents");
  }
  if (targets.empty()) throw DimensionError("scenario has no targets");
  const std::size_t dim = state_dim();
  for (std::size_t i = 0; i < n; ++i) {
    systems[i].validate();
    if (systems[i].state_dim() != dim || x0[i].size() != dim) {
      throw DimensionError("agent " + std::to_string(i) + " has inconsistent state dimension");
    }
    for (double v : x0[i])
      if (!std::isfinite(v)) throw DomainError("initial states must be finite");
    if (systems[i].flavor == mpc::Flavor::Continuous && !euler_step) {
      throw ParameterError("continuous systems need an Euler step");
    }
  }
  for (const auto& t : targets) {
    if (t.size() != dim) throw DimensionError("target dimension does not match the state");
    for (double v : t)
      if (!std::isfinite(v)) throw DomainError("targets must be finite");
  }
  if (marginals.a.size() != n || marginals.b.size() != targets.size()) {
    throw DimensionError("marginal lengths do not match agents/targets");
  }
  marginals.validate();
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ParameterError("epsilon must be positive");
  if (tau_h < 1) throw ParameterError("horizon must be at least one step");
  if (step_count < 0) throw ParameterError("step count must be nonnegative");
  if (!alpha0.empty()) {
    if (alpha0.size() != n) throw DimensionError("alpha0 length does not match agents");
    for (auto v : alpha0)
      if (!(v > 0) || !std::isfinite(v)) throw DomainError("alpha0 entries must be positive");
  }
  if (const auto* f = std::get_if<ot::FixedCount>(&schedule)) {
    if (f->iterations < 1) throw ParameterError("fixed iteration count must be >= 1");
  } else {
    const auto& t = std::get<ot::MarginalTolerance>(schedule);
    if (!(t.threshold > 0.0)) throw ParameterError("tolerance threshold must be positive");
    if (t.cap < 1) throw ParameterError("iteration cap must be >= 1");
  }
}

FleetModel::FleetModel(FleetScenario scenario) : scenario_(std::move(scenario)) {
  scenario_.validate();
  const std::size_t n = scenario_.agents();
  systems_.reserve(n);
  laws_.reserve(n);
  oracles_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = scenario_.systems[i];
    systems_.push_back(s.flavor == mpc::Flavor::Continuous
                           ? mpc::discretize_euler(s, *scenario_.euler_step)
                           : s);
    // agents usually share dynamics; reuse the previous law when they do
    if (i > 0 && systems_[i].A == systems_[i - 1].A && systems_[i].B == systems_[i - 1].B) {
      laws_.push_back(laws_.back());
    } else {
      laws_.push_back(std::make_shared<const mpc::MpcLaw>(
          mpc::build_mpc_law(systems_[i], mpc::HorizonSteps{scenario_.tau_h})));
    }
  }
}

void FleetModel::set_oracle(std::size_t i, AgentOracle oracle) { oracles_.at(i) = std::move(oracle); }

double FleetModel::cost(std::size_t i, std::span<const double> x,
                        std::span<const double> xhat) const {
  if (oracles_[i]) return oracles_[i]->cost(x, xhat);
  return mpc::mpc_cost(*laws_[i], x, xhat);
}

Vector FleetModel::control(std::size_t i, std::span<const double> x,
                           std::span<const double> xhat) const {
  if (oracles_[i]) return oracles_[i]->control(x, xhat);
  return mpc::mpc_control(*laws_[i], x, xhat);
}

ot::CostMatrix FleetModel::cost_matrix(const std::vector<Vector>& x) const {
  const std::size_t n = agents();
  const std::size_t m = scenario_.targets.size();
  const std::size_t dim = scenario_.state_dim();
  if (x.size() != n) throw DimensionError("fleet state has the wrong number of agents");
  std::vector<double> c(n * m);
  Vector d(dim);
  for (std::size_t i = 0; i < n; ++i) {
    if (oracles_[i]) {
      for (std::size_t j = 0; j < m; ++j) c[i * m + j] = oracles_[i]->cost(x[i], scenario_.targets[j]);
      continue;
    }
    const Matrix& g = laws_[i]->Gcal;
    for (std::size_t j = 0; j < m; ++j) {
      const Vector& t = scenario_.targets[j];
      for (std::size_t r = 0; r < dim; ++r) d[r] = x[i][r] - t[r];
      double s = 0.0;
      for (std::size_t r = 0; r < dim; ++r) {
        double row = 0.0;
        for (std::size_t q = 0; q < dim; ++q) row += g(r, q) * d[q];
        s += d[r] * row;
      }
      // a PSD form can come out a hair negative through rounding
      c[i * m + j] = s < 0.0 ? 0.0 : s;
    }
  }
  return ot::CostMatrix(n, m, std::move(c));
}

ot::GibbsKernel FleetModel::kernel_at(const std::vector<Vector>& x) const {
  return ot::gibbs_kernel(cost_matrix(x), scenario_.epsilon);
}

Vector FleetModel::advance(std::size_t i, std::span<const double> x,
                           std::span<const double> u) const {
  Vector next = systems_[i].A.apply(x);
  const Vector bu = systems_[i].B.apply(u);
  for (std::size_t r = 0; r < next.size(); ++r) next[r] += bu[r];
  return next;
}

}  // namespace smpc
