#pragma once

// Convergence and stability diagnostics for a fleet under Sinkhorn MPC.

#include <span>
#include <vector>

#include "smpc/fleet.hpp"

namespace smpc::analysis {

using FleetState = std::vector<Vector>;

struct EntropicCost {
  double value = 0.0;
  ot::Coupling coupling;
  long iterations = 0;
};

/// E(x) = sum C_ij P*_ij - eps H(P*) at the Sinkhorn coupling solved to
/// marginal violation theta. alpha_init warm-starts the solve.
EntropicCost entropic_cost(const FleetModel& model, const FleetState& x, double theta = 1e-10,
                           std::span<const ot::Real> alpha_init = {});

/// Energy of a coupling that is already available.
double entropic_cost_at(const ot::CostMatrix& c, const ot::Coupling& p);

/// grad_i E = 2 Gcal_i sum_j P*_ij (x_i - x_j^d)
FleetState entropic_cost_gradient(const FleetModel& model, const FleetState& x,
                                  double theta = 1e-10);

struct EquilibriumReport {
  double residual = 0.0;  // max over agents
  std::vector<double> per_agent;
  ot::Coupling coupling;
  double epsilon = 0.0;
};

/// |x_i - (1/a_i) sum_j P*_ij x_j^d| per agent at the converged coupling.
EquilibriumReport equilibrium_residual(const FleetModel& model, const FleetState& x,
                                       double theta = 1e-10,
                                       std::span<const ot::Real> alpha_init = {});

/// Same measurement against a given coupling.
EquilibriumReport equilibrium_residual_at(const FleetModel& model, const FleetState& x,
                                          const ot::Coupling& p);

struct Anchor {
  FleetState x;
  ot::RealVector beta;
  ot::Coupling coupling;
};

/// Builds the anchor (x^e, beta^e, P^e) at an equilibrium state.
Anchor make_anchor(const FleetModel& model, const FleetState& xe, double theta = 1e-10);

/// sum_i |x_i - N sum_j P^e_ij x_j^d|^2_{Gcal_i} + gamma d_H(beta, beta^e)
double lyapunov_V(const FleetModel& model, const FleetState& x, std::span<const ot::Real> beta,
                  const Anchor& anchor, double gamma = 1.0);

struct AgentBound {
  double rho = 0.0;
  double nu = 0.0;
  double kappa = 1.0;
  double bound = 0.0;  // kappa r_bar |I - Abar| / (1 - (rho + nu))
};

struct BoundReport {
  std::vector<AgentBound> agents;
  double r_bar = 0.0;
};

/// kappa_i = max_k |Abar_i^k| / (rho_i + nu_i)^k. An empty nu uses
/// (1 - rho_i) / 2 for every agent.
BoundReport ultimate_bound(const FleetModel& model, std::span<const double> nu = {});

/// First k with kappa (rho + nu)^k |x_i^0| < delta.
long settling_index(const AgentBound& b, double initial_norm, double delta);

/// |Abar^k| |x^0| + sum_{s=1..k} |Abar^{s-1}| r_bar |I - Abar| for k = 0..steps.
std::vector<double> trajectory_envelope(const Matrix& abar, double initial_norm, double r_bar,
                                        long steps);

struct DualObjective {
  double value = 0.0;
  ot::RealVector grad_f;
  ot::RealVector grad_g;
};

/// Q(f,g;x) = f^T a + g^T b - eps sum_ij e^{f_i/eps} K_ij(x) e^{g_j/eps}
DualObjective dual_objective(std::span<const ot::Real> f, std::span<const ot::Real> g,
                             const FleetModel& model, const FleetState& x);

/// Duals (eps log alpha, eps log beta) of a coupling.
std::pair<ot::RealVector, ot::RealVector> duals_of(const ot::Coupling& p);

}  // namespace smpc::analysis
