#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "smpc/analysis.hpp"
#include "smpc/assignment.hpp"
#include "smpc/simulator.hpp"
#include "smpc/sweep.hpp"

using namespace smpc;
using namespace smpc::analysis;

namespace {

FleetScenario scalar_fleet(std::vector<double> x0, std::vector<double> targets, double eps) {
  FleetScenario sc;
  for (double v : x0) {
    sc.systems.push_back({Matrix{{1.0}}, Matrix{{0.1}}, mpc::Flavor::Discrete});
    sc.x0.push_back({v});
  }
  for (double v : targets) sc.targets.push_back({v});
  sc.marginals = ot::Marginals::uniform(x0.size(), targets.size());
  sc.epsilon = eps;
  sc.tau_h = 20;
  return sc;
}

// Four agents in the plane with distinct dynamics.
FleetScenario planar_fleet(double eps) {
  FleetScenario sc;
  sc.systems = {
      {Matrix{{1.04, 0.026}, {-0.01, 1.02}}, Matrix{{0.3, 0.0}, {0.0, 0.3}}, mpc::Flavor::Discrete},
      {Matrix{{1.0, 0.1}, {0.0, 1.0}}, Matrix{{0.3, 0.0}, {0.15, 0.3}}, mpc::Flavor::Discrete},
      {Matrix{{0.9, 0.0}, {0.1, 0.95}}, Matrix{{0.4, 0.0}, {0.0, 0.3}}, mpc::Flavor::Discrete},
      {Matrix{{1.0, 0.0}, {0.0, 1.0}}, Matrix{{0.3, 0.0}, {0.0, 0.3}}, mpc::Flavor::Discrete},
  };
  sc.x0 = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  sc.targets = {{-1.0, -1.0}, {1.0, -0.5}, {-0.5, 1.0}, {1.0, 1.0}};
  sc.marginals = ot::Marginals::uniform(4, 4);
  sc.epsilon = eps;
  sc.tau_h = 10;
  return sc;
}

}  // namespace

TEST(EntropicCost, SingleEntry) {
  auto sc = scalar_fleet({2.0}, {0.0}, 0.3);
  const FleetModel model(sc);
  // C = 5 * 2^2 = 20, P = 1, H(P) = 1.
  const auto e = entropic_cost(model, sc.x0);
  EXPECT_NEAR(e.value, 20.0 - 0.3, 1e-12);
}

// E sits between the exact OT cost minus eps * max entropy and the value of
// the optimal permutation coupling.
TEST(EntropicCost, BoundedByUnregularizedProblem) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + t % 5;
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    const double eps = 1.0 + 1.0 * (t % 4);
    const FleetModel model(scalar_fleet(x, y, eps));
    const auto c = model.cost_matrix(model.scenario().x0);
    const double ot0 = hungarian(c).total_cost / static_cast<double>(n);
    const double e = entropic_cost(model, model.scenario().x0).value;
    const double logn = std::log(static_cast<double>(n));
    EXPECT_LE(e, ot0 - eps * (logn + 1.0) + 1e-9);
    EXPECT_GE(e, ot0 - eps * (2.0 * logn + 1.0) - 1e-9);
  }
}

TEST(EntropicCost, AtMatchesDefinition) {
  const ot::CostMatrix c(1, 2, {1.0, 3.0});
  ot::Coupling p{1, 2, {0.25L, 0.75L}, {}, 0.5};
  const double h = -(0.25 * (std::log(0.25) - 1) + 0.75 * (std::log(0.75) - 1));
  EXPECT_NEAR(entropic_cost_at(c, p), 0.25 + 2.25 - 0.5 * h, 1e-15);
}

TEST(EntropicCost, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int t = 0; t < 50; ++t) {
    const FleetModel model(planar_fleet(0.5 + 0.25 * (t % 3)));
    FleetState x(4, Vector(2));
    for (auto& xi : x)
      for (auto& v : xi) v = u(rng);
    const auto grad = entropic_cost_gradient(model, x, 1e-14);
    const double h = 1e-4;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t d = 0; d < 2; ++d) {
        FleetState xp = x, xm = x;
        xp[i][d] += h;
        xm[i][d] -= h;
        const double fd =
            (entropic_cost(model, xp, 1e-14).value - entropic_cost(model, xm, 1e-14).value) /
            (2.0 * h);
        EXPECT_NEAR(grad[i][d], fd, 1e-4 * std::max(1.0, std::fabs(fd)))
            << "state " << t << " agent " << i << " dim " << d;
      }
  }
}

TEST(Duality, ObjectiveMatchesPrimalAtConvergedDuals) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int t = 0; t < 20; ++t) {
    const FleetModel model(planar_fleet(0.4 + 0.2 * (t % 4)));
    FleetState x(4, Vector(2));
    for (auto& xi : x)
      for (auto& v : xi) v = u(rng);
    const auto e = entropic_cost(model, x, 1e-14);
    const auto [f, g] = duals_of(e.coupling);
    const auto q = dual_objective(f, g, model, x);
    EXPECT_LE(std::fabs(q.value - e.value), 1e-8 * (1.0 + std::fabs(e.value)));
    for (auto v : q.grad_f) EXPECT_LT(std::fabs(static_cast<double>(v)), 1e-12);
    for (auto v : q.grad_g) EXPECT_LT(std::fabs(static_cast<double>(v)), 1e-12);

    // Any other dual pair is no better (weak duality).
    ot::RealVector f2 = f;
    f2[0] += 0.1;
    EXPECT_LE(dual_objective(f2, g, model, x).value, e.value + 1e-12);
  }
}

TEST(Residual, ZeroAtTargetForSingleAgent) {
  const FleetModel model(scalar_fleet({0.7}, {0.7}, 0.1));
  EXPECT_EQ(equilibrium_residual(model, model.scenario().x0).residual, 0.0);
  const auto r = equilibrium_residual(model, FleetState{{1.0}});
  EXPECT_NEAR(r.residual, 0.3, 1e-15);
}

TEST(Lyapunov, VanishesAtAnchor) {
  const FleetModel model(scalar_fleet({-1.0, 1.0}, {-1.0, 1.0}, 1.0));
  // The symmetric state is an equilibrium by symmetry once the fleet settles.
  auto sc = model.scenario();
  sc.step_count = 3000;
  sc.schedule = ot::MarginalTolerance{1e-12, 100000};
  const FleetModel settled(sc);
  const auto log = Simulator(settled).run();
  const auto anchor = make_anchor(settled, log.final_state.x);
  EXPECT_NEAR(lyapunov_V(settled, anchor.x, anchor.beta, anchor), 0.0, 1e-9);
  FleetState moved = anchor.x;
  moved[0][0] += 0.1;
  EXPECT_GT(lyapunov_V(settled, moved, anchor.beta, anchor), 0.0);
}

TEST(UltimateBound, ScalarAgent) {
  // Abar = 0.95, rho + nu = 0.975, kappa = 1; bound = r_bar * 0.05 / 0.025.
  const FleetModel model(scalar_fleet({3.0}, {0.625}, 0.1));
  const auto rep = ultimate_bound(model);
  ASSERT_EQ(rep.agents.size(), 1u);
  EXPECT_NEAR(rep.r_bar, 0.625, 0.0);
  EXPECT_NEAR(rep.agents[0].rho, 0.95, 1e-14);
  EXPECT_NEAR(rep.agents[0].nu, 0.025, 1e-14);
  EXPECT_EQ(rep.agents[0].kappa, 1.0);
  EXPECT_NEAR(rep.agents[0].bound, 1.25, 1e-12);
  // First k with 0.975^k * 3 < 0.01.
  const long k = settling_index(rep.agents[0], 3.0, 0.01);
  EXPECT_LT(std::pow(0.975, k) * 3.0, 0.01);
  EXPECT_GE(std::pow(0.975, k - 1) * 3.0, 0.01);
}

TEST(UltimateBound, NonNormalClosedLoopHasKappaAboveOne) {
  FleetScenario sc;
  sc.systems = {{Matrix{{1.0, 5.0}, {0.0, 1.0}}, Matrix{{0.1, 0.0}, {0.0, 0.1}}, mpc::Flavor::Discrete}};
  sc.x0 = {{1.0, 1.0}};
  sc.targets = {{0.0, 0.0}};
  sc.marginals = ot::Marginals::uniform(1, 1);
  sc.tau_h = 10;
  const FleetModel model(sc);
  const auto b = ultimate_bound(model).agents[0];
  EXPECT_GT(b.kappa, 1.0);
  // kappa dominates the normalized powers.
  const Matrix& abar = model.law(0).Abar;
  for (unsigned k = 0; k < 200; ++k)
    EXPECT_LE(spectral_norm(mat_power(abar, k)), b.kappa * std::pow(b.rho + b.nu, k) * (1 + 1e-12));
}

TEST(Envelope, ScalarRecursion) {
  const auto env = trajectory_envelope(Matrix{{0.5}}, 4.0, 1.0, 3);
  ASSERT_EQ(env.size(), 4u);
  EXPECT_DOUBLE_EQ(env[0], 4.0);
  EXPECT_DOUBLE_EQ(env[1], 2.0 + 0.5);
  EXPECT_DOUBLE_EQ(env[2], 1.0 + 0.5 + 0.25);
  EXPECT_DOUBLE_EQ(env[3], 0.5 + 0.5 + 0.25 + 0.125);
}

// Two agents, two targets: equilibria near both assignments, approaching
// them exponentially as eps shrinks.
TEST(EquilibriumCheck, TwoBasinsDecayExponentially) {
  const auto sc = scalar_fleet({0.0, 0.0}, {-1.0, 1.0}, 1.0);
  const std::vector<double> grid{2.0, 1.6, 1.3, 1.1, 1.0};
  for (const auto& sigma : {std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{1, 0}}) {
    const auto table = exponential_equilibrium_check(sc, sigma, grid);
    ASSERT_EQ(table.rows.size(), grid.size());
    for (const auto& r : table.rows) {
      ASSERT_TRUE(r.converged) << r.error;
      EXPECT_LT(r.state_distance, 0.2);
      EXPECT_GT(r.state_distance, 0.0);
    }
    for (std::size_t k = 1; k < grid.size(); ++k)
      EXPECT_LT(table.rows[k].state_distance, table.rows[k - 1].state_distance);
    EXPECT_LT(table.slope, 0.0);
  }
}

TEST(EquilibriumCheck, RejectsBadInput) {
  const auto sc = scalar_fleet({0.0, 0.0}, {-1.0, 1.0}, 1.0);
  EXPECT_THROW(exponential_equilibrium_check(sc, {0, 0}, {1.0}), DomainError);
  EXPECT_THROW(exponential_equilibrium_check(sc, {0, 1}, {1.0, 2.0}), ParameterError);
}

TEST(Sweep, EmptyGridIsAnError) {
  auto sc = scalar_fleet({0.0}, {1.0}, 1.0);
  sc.step_count = 10;
  EXPECT_THROW(epsilon_sweep(sc, {}), ParameterError);
  EXPECT_THROW(epsilon_sweep(sc, {2.0, 1.0}), ParameterError);
}

TEST(Sweep, SingleAgentSettlesOnTarget) {
  auto sc = scalar_fleet({0.0}, {1.0}, 1.0);
  sc.step_count = 2000;
  const auto rows = epsilon_sweep(sc, {0.5, 5.0});
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.ok);
    EXPECT_TRUE(r.steady);
    EXPECT_NEAR(r.steady_state[0][0], 1.0, 1e-7);
  }
  EXPECT_EQ(rows[0].steady_state, rows[1].steady_state);
}
