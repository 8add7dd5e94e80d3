#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "smpc/mpc.hpp"
#include "smpc/navigator.hpp"
#include "smpc/otcore.hpp"

namespace smpc {

enum class SnapshotPolicy { Auto, On, Off };

struct FleetScenario {
  std::vector<mpc::LinearSystem> systems;  // one per agent
  std::optional<double> euler_step;        // required when systems are continuous
  std::vector<Vector> x0;
  TargetSet targets;
  ot::Marginals marginals;
  double epsilon = 1.0;
  int tau_h = 1;
  ot::StoppingPolicy schedule = ot::MarginalTolerance{0.005, 10'000};
  ot::RealVector alpha0;  // empty means all ones
  long step_count = 0;
  NavigatorKind navigator = Barycentric{};
  SnapshotPolicy snapshots = SnapshotPolicy::Auto;
  /// Per-step entropic cost and equilibrium residual (one tight Sinkhorn
  /// solve per step).
  bool diagnostics = false;

  std::size_t agents() const noexcept { return x0.size(); }
  std::size_t state_dim() const noexcept { return x0.empty() ? 0 : x0.front().size(); }
  void validate() const;
};

/// Per-agent cost and control. The default is the quadratic MPC law; a
/// different optimal-control solver can be plugged in here.
struct AgentOracle {
  std::function<double(std::span<const double>, std::span<const double>)> cost;
  std::function<Vector(std::span<const double>, std::span<const double>)> control;
};

/// Scenario plus everything precomputed from it: discrete dynamics and one
/// MPC law per agent.
class FleetModel {
 public:
  explicit FleetModel(FleetScenario scenario);

  const FleetScenario& scenario() const noexcept { return scenario_; }
  std::size_t agents() const noexcept { return scenario_.agents(); }
  const mpc::LinearSystem& system(std::size_t i) const { return systems_[i]; }
  const mpc::MpcLaw& law(std::size_t i) const { return *laws_[i]; }

  void set_oracle(std::size_t i, AgentOracle oracle);

  double cost(std::size_t i, std::span<const double> x, std::span<const double> xhat) const;
  Vector control(std::size_t i, std::span<const double> x, std::span<const double> xhat) const;

  /// C_ij = cost of agent i reaching target j from x_i.
  ot::CostMatrix cost_matrix(const std::vector<Vector>& x) const;
  ot::GibbsKernel kernel_at(const std::vector<Vector>& x) const;

  /// x_i <- A_i x_i + B_i u_i
  Vector advance(std::size_t i, std::span<const double> x, std::span<const double> u) const;

 private:
  FleetScenario scenario_;
  std::vector<mpc::LinearSystem> systems_;
  std::vector<std::shared_ptr<const mpc::MpcLaw>> laws_;
  std::vector<std::optional<AgentOracle>> oracles_;
};

}  // namespace smpc
