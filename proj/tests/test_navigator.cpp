#include <gtest/gtest.h>

#include "smpc/navigator.hpp"

using namespace smpc;

namespace {

ot::Coupling make(std::size_t n, std::size_t m, std::vector<ot::Real> p) {
  ot::Coupling c;
  c.rows = n;
  c.cols = m;
  c.p = std::move(p);
  return c;
}

}  // namespace

TEST(Barycentric, PermutationCouplingPicksTargets) {
  const TargetSet t{{0.0, 1.0}, {2.0, 3.0}};
  const auto p = make(2, 2, {0.0L, 0.5L, 0.5L, 0.0L});
  const ot::RealVector a{0.5L, 0.5L};
  const auto x = barycentric_targets(p, t, a);
  EXPECT_EQ(x[0], (Vector{2.0, 3.0}));
  EXPECT_EQ(x[1], (Vector{0.0, 1.0}));
}

TEST(Barycentric, ProductCouplingGivesCentroid) {
  const TargetSet t{{-1.0}, {0.0}, {4.0}};
  const ot::Real w = 1.0L / 6;
  const auto p = make(2, 3, {w, w, w, w, w, w});
  const auto x = barycentric_targets(p, t, ot::RealVector{0.5L, 0.5L});
  EXPECT_NEAR(x[0][0], 1.0, 1e-15);
  EXPECT_NEAR(x[1][0], 1.0, 1e-15);
}

TEST(Barycentric, NonUniformRowMass) {
  const TargetSet t{{0.0}, {10.0}};
  const auto p = make(2, 2, {0.1L, 0.1L, 0.0L, 0.8L});
  const auto x = barycentric_targets(p, t, ot::RealVector{0.2L, 0.8L});
  EXPECT_NEAR(x[0][0], 5.0, 1e-15);
  EXPECT_NEAR(x[1][0], 10.0, 1e-15);
}

TEST(Barycentric, Errors) {
  const TargetSet t{{0.0}, {1.0}};
  const auto p = make(2, 2, {0.0L, 0.0L, 0.5L, 0.5L});
  try {
    barycentric_targets(p, t, ot::RealVector{0.0L, 1.0L});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateRow);
  }
  EXPECT_THROW(barycentric_targets(p, TargetSet{{0.0}}, ot::RealVector{0.5L, 0.5L}),
               DimensionError);
}

TEST(Navigate, HookIsCalled) {
  int calls = 0;
  NavigatorHook hook = [&](const ot::Coupling& c, const TargetSet& t, std::span<const ot::Real>) {
    ++calls;
    return std::vector<Vector>(c.rows, t.front());
  };
  const TargetSet t{{7.0}, {8.0}};
  const auto p = make(2, 2, {0.25L, 0.25L, 0.25L, 0.25L});
  const auto x = navigate(NavigatorKind{hook}, p, t, ot::RealVector{0.5L, 0.5L});
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(x[1][0], 7.0);
  EXPECT_NEAR(navigate(Barycentric{}, p, t, ot::RealVector{0.5L, 0.5L})[0][0], 7.5, 1e-15);
}
