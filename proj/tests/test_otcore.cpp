#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "smpc/assignment.hpp"
#include "smpc/otcore.hpp"

using namespace smpc;
using namespace smpc::ot;

namespace {

CostMatrix random_cost(std::mt19937_64& rng, std::size_t n, std::size_t m, double hi = 1.0) {
  std::uniform_real_distribution<double> u(0.0, hi);
  std::vector<double> c(n * m);
  for (auto& v : c) v = u(rng);
  return CostMatrix(n, m, std::move(c));
}

SinkhornResult solve(const CostMatrix& c, double eps, double threshold = 1e-13,
                     long cap = 1'000'000) {
  const auto k = gibbs_kernel(c, eps);
  const auto m = Marginals::uniform(c.rows(), c.cols());
  const RealVector ones(c.rows(), 1);
  return sinkhorn_solve(k, m, ones, MarginalTolerance{threshold, cap});
}

double blur(const Coupling& p) {
  Real worst = 0;
  const Real ab = Real(1) / (p.rows * p.cols);
  for (Real v : p.p) worst = std::max(worst, std::fabs(v - ab));
  return static_cast<double>(worst);
}

}  // namespace

TEST(CostMatrix, RejectsNegativeAndNonFinite) {
  EXPECT_THROW(CostMatrix(1, 2, {0.0, -1.0}), DomainError);
  EXPECT_THROW(CostMatrix(1, 1, {INFINITY}), DomainError);
  EXPECT_THROW(CostMatrix(2, 2, {0.0}), DimensionError);
}

TEST(GibbsKernel, EntriesAndUnderflow) {
  const CostMatrix c(1, 2, {0.0, 2.0});
  const auto k = gibbs_kernel(c, 0.5);
  EXPECT_EQ(k(0, 0), 1.0L);
  EXPECT_NEAR(static_cast<double>(k(0, 1)), std::exp(-4.0), 1e-18);
  // exp(-1000) is fine in extended precision.
  EXPECT_GT(gibbs_kernel(CostMatrix(1, 1, {1000.0}), 1.0)(0, 0), 0.0L);
  EXPECT_THROW(gibbs_kernel(CostMatrix(1, 1, {1e9}), 1e-3), DegenerateKernelError);
  EXPECT_THROW(gibbs_kernel(c, 0.0), ParameterError);
}

TEST(Marginals, Validation) {
  EXPECT_NO_THROW(Marginals::uniform(3, 4).validate());
  Marginals bad{{0.5L, 0.6L}, {1.0L}};
  EXPECT_THROW(bad.validate(), DomainError);
  Marginals neg{{1.5L, -0.5L}, {1.0L}};
  EXPECT_THROW(neg.validate(), DomainError);
}

// Symmetric 2x2 with cost [[0,1],[1,0]]: alpha = beta and P_11 = 1 / (2 (1 + k)).
TEST(Sinkhorn, TwoByTwoClosedForm) {
  const double eps = 0.7;
  const auto r = solve(CostMatrix(2, 2, {0.0, 1.0, 1.0, 0.0}), eps);
  const long double k = std::exp(-1.0L / eps);
  EXPECT_NEAR(static_cast<double>(r.coupling(0, 0)), static_cast<double>(0.5L / (1 + k)), 1e-14);
  EXPECT_NEAR(static_cast<double>(r.coupling(0, 1)), static_cast<double>(0.5L * k / (1 + k)), 1e-14);
}

TEST(Sinkhorn, RowSumsExactAfterEveryStop) {
  std::mt19937_64 rng(2);
  const auto c = random_cost(rng, 5, 7);
  const auto k = gibbs_kernel(c, 0.1);
  const auto m = Marginals::uniform(5, 7);
  for (long s : {1L, 2L, 5L}) {
    const auto r = sinkhorn_solve(k, m, RealVector(5, 1), FixedCount{s});
    EXPECT_EQ(r.iterations, s);
    const auto rows = r.coupling.row_sums();
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(static_cast<double>(rows[i]), 1.0 / 5, 1e-17);
    EXPECT_NEAR(static_cast<double>(marginal_violation(r.coupling, m)),
                static_cast<double>(r.violation), 1e-15);
  }
}

TEST(Sinkhorn, ConvergedScalingIsAFixedPoint) {
  std::mt19937_64 rng(6);
  const auto c = random_cost(rng, 6, 6);
  const auto k = gibbs_kernel(c, 0.2);
  const auto m = Marginals::uniform(6, 6);
  const auto r = sinkhorn_solve(k, m, RealVector(6, 1), MarginalTolerance{1e-15, 100000});
  const auto next = sinkhorn_step(k, m, r.coupling.scaling.alpha);
  EXPECT_LT(static_cast<double>(hilbert_metric(next.alpha, r.coupling.scaling.alpha)), 1e-13);
}

TEST(Sinkhorn, NonConvergenceCarriesBestIterate) {
  std::mt19937_64 rng(9);
  const auto c = random_cost(rng, 4, 4, 10.0);
  const auto k = gibbs_kernel(c, 0.01);
  const auto m = Marginals::uniform(4, 4);
  try {
    sinkhorn_solve(k, m, RealVector(4, 1), MarginalTolerance{1e-30, 3});
    FAIL() << "expected non-convergence";
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonConvergence);
    EXPECT_GE(e.best().iterations, 1);
    EXPECT_LE(e.best().iterations, 3);
    EXPECT_NEAR(static_cast<double>(marginal_violation(e.best().coupling, m)),
                static_cast<double>(e.best().violation), 1e-15);
  }
}

TEST(Sinkhorn, NonUniformMarginals) {
  std::mt19937_64 rng(12);
  const auto c = random_cost(rng, 3, 4);
  Marginals m{{0.2L, 0.3L, 0.5L}, {0.1L, 0.4L, 0.25L, 0.25L}};
  const auto r = sinkhorn_solve(gibbs_kernel(c, 0.3), m, RealVector(3, 1),
                                MarginalTolerance{1e-14, 100000});
  const auto cols = r.coupling.col_sums();
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(static_cast<double>(cols[j]), static_cast<double>(m.b[j]), 1e-14);
}

TEST(Sinkhorn, DimensionMismatchThrows) {
  const auto k = gibbs_kernel(CostMatrix(2, 2, {0, 1, 1, 0}), 1.0);
  EXPECT_THROW(sinkhorn_solve(k, Marginals::uniform(3, 2), RealVector(2, 1), FixedCount{1}),
               DimensionError);
}

// d_H(alpha_{t+1}, alpha*) <= lambda^2 d_H(alpha_t, alpha*): each half-step
// multiplies by a positive kernel and the divisions are isometries.
TEST(Sinkhorn, HilbertContractionPerIteration) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + t % 5, mm = 2 + (t / 5) % 4;
    const auto c = random_cost(rng, n, mm);
    const auto k = gibbs_kernel(c, 0.3 + 0.1 * (t % 3));
    const auto m = Marginals::uniform(n, mm);
    const auto star = sinkhorn_solve(k, m, RealVector(n, 1), MarginalTolerance{1e-16, 1000000});
    const Real lambda = contraction_factor(k);
    ASSERT_LT(lambda, 1);

    RealVector alpha(n);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (auto& v : alpha) v = u(rng);
    for (int it = 0; it < 40; ++it) {
      const Real before = hilbert_metric(alpha, star.coupling.scaling.alpha);
      if (before < 1e-9L) break;
      alpha = sinkhorn_step(k, m, alpha).alpha;
      const Real after = hilbert_metric(alpha, star.coupling.scaling.alpha);
      EXPECT_LE(static_cast<double>(after / before), static_cast<double>(lambda * lambda) + 1e-12)
          << "instance " << t << " iteration " << it;
    }
  }
}

TEST(HilbertMetric, Properties) {
  const RealVector x{1, 2, 3};
  RealVector y = x;
  for (auto& v : y) v *= 7;
  EXPECT_EQ(hilbert_metric(x, y), 0.0L);
  const RealVector z{1, 1, 1};
  EXPECT_NEAR(static_cast<double>(hilbert_metric(x, z)), std::log(3.0), 1e-15);
  EXPECT_NEAR(static_cast<double>(hilbert_metric(z, x)), std::log(3.0), 1e-15);
}

TEST(ContractionFactor, TwoByTwo) {
  // eta = 1 / k^2, so lambda = (1 - k) / (1 + k).
  const auto k = gibbs_kernel(CostMatrix(2, 2, {0.0, 1.0, 1.0, 0.0}), 1.0);
  const double kk = std::exp(-1.0);
  EXPECT_NEAR(static_cast<double>(contraction_factor(k)), (1 - kk) / (1 + kk), 1e-15);
  EXPECT_EQ(contraction_factor(gibbs_kernel(CostMatrix(2, 2, {1, 1, 1, 1}), 1.0)), 0.0L);
}

TEST(Sinkhorn, ApproachesProductCouplingAsEpsilonGrows) {
  std::mt19937_64 rng(40);
  const auto c = random_cost(rng, 5, 5);
  double previous = INFINITY;
  for (double eps : {0.05, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0}) {
    const double b = blur(solve(c, eps).coupling);
    EXPECT_LT(b, previous) << "eps " << eps;
    previous = b;
  }
  EXPECT_LT(previous, 1e-3);
}

// Small eps: the coupling approaches the optimal permutation matrix / N.
TEST(Sinkhorn, SharpensToOptimalPermutation) {
  std::mt19937_64 rng(77);
  int checked = 0;
  for (int t = 0; t < 40 && checked < 20; ++t) {
    const std::size_t n = 2 + t % 5;
    const auto c = random_cost(rng, n, n);
    const auto best = brute_force_assignment(c);
    // Skip near ties, which legitimately split mass.
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    double second = INFINITY;
    do {
      if (perm == best.sigma) continue;
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += c(i, perm[i]);
      second = std::min(second, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (second - best.total_cost < 0.02) continue;
    ++checked;

    const auto r = solve(c, 1e-3 * c.max(), 1e-6, 5'000'000);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double want = best.sigma[i] == j ? 1.0 / n : 0.0;
        EXPECT_NEAR(static_cast<double>(r.coupling(i, j)), want, 1e-3);
      }
  }
  EXPECT_GE(checked, 10);
}

TEST(Sinkhorn, ScaleInvariance) {
  std::mt19937_64 rng(50);
  const auto c = random_cost(rng, 4, 5);
  std::vector<double> scaled(c.entries().begin(), c.entries().end());
  for (auto& v : scaled) v *= 8.0;
  const auto p1 = solve(c, 0.25).coupling;
  const auto p2 = solve(CostMatrix(4, 5, scaled), 2.0).coupling;
  for (std::size_t i = 0; i < p1.p.size(); ++i)
    EXPECT_NEAR(static_cast<double>(p1.p[i]), static_cast<double>(p2.p[i]), 1e-14);
}

TEST(Entropy, BoundsForCouplings) {
  std::mt19937_64 rng(60);
  const std::size_t n = 6;
  const double upper = 2.0 * std::log(n) + 1.0;  // H(a b^T)
  const double lower = std::log(n) + 1.0;        // any coupling of uniform marginals
  for (double eps : {0.01, 0.1, 1.0, 10.0}) {
    const auto p = solve(random_cost(rng, n, n), eps).coupling;
    const double h = static_cast<double>(entropy(p));
    EXPECT_LE(h, upper + 1e-12);
    EXPECT_GE(h, lower - 1e-9);
  }
  Coupling product{2, 2, {0.25L, 0.25L, 0.25L, 0.25L}, {}, 1.0};
  EXPECT_NEAR(static_cast<double>(entropy(product)), 2.0 * std::log(2.0) + 1.0, 1e-15);
  Coupling with_zero{1, 2, {1.0L, 0.0L}, {}, 1.0};
  EXPECT_EQ(entropy(with_zero), 1.0L);
}

TEST(Sinkhorn, EpsilonRecordedOnCoupling) {
  const auto r = solve(CostMatrix(1, 1, {3.0}), 0.4);
  EXPECT_EQ(r.coupling.epsilon, 0.4);
  EXPECT_EQ(r.coupling(0, 0), 1.0L);
}
