#include <gtest/gtest.h>

#include <set>

#include "fvem/verify.hpp"

using namespace fvem;
using namespace fvem::verify;

TEST(Suite, DefaultSeedPasses) {
  const auto results = run_suite();
  for (const auto& r : results) EXPECT_TRUE(r.passed) << r.family << ": " << r.name << " max rel " << r.max_rel;
  std::set<std::string> families;
  for (const auto& r : results) families.insert(r.family);
  EXPECT_EQ(families.size(), 7u);
}

TEST(Suite, OtherSeedsPass) {
  for (const std::uint64_t seed : {1u, 2u, 12345u}) {
    SuiteOptions o;
    o.seed = seed;
    EXPECT_TRUE(all_passed(run_suite(o))) << "seed " << seed;
  }
}

TEST(Suite, ReportIsDeterministic) {
  EXPECT_EQ(to_json(run_suite(), 42).dump(), to_json(run_suite(), 42).dump());
  SuiteOptions other;
  other.seed = 43;
  EXPECT_NE(to_json(run_suite(), 42).dump(), to_json(run_suite(other), 43).dump());
}

TEST(Suite, PerturbedEdgeConstantIsDetected) {
  SuiteOptions o;
  o.edge.constant = 1.0 / 20;
  for (const auto& r : run_suite(o)) EXPECT_EQ(r.passed, r.family != "edge_integrals") << r.family;
}

TEST(Suite, CorruptedToleranceFails) {
  SuiteOptions o;
  o.tolerance_override = -1.0;
  EXPECT_FALSE(all_passed(run_suite(o)));
}

TEST(EdgeIntegrals, ConstantTestFunctionGivesZero) {
  OracleResult r = start("edge", "constant v", polynomial_tol);
  check_edge_integrals({0, 0.5, 0, 0.25}, {0.3, -0.2, 0.9, 0.1}, {0.7, 0.7, 0.7, 0.7}, r);
  EXPECT_EQ(r.trials, 8u);
  EXPECT_LE(r.max_abs, 1e-16);
}

TEST(BoundaryFlux, Examples) {
  // w = v = xi * eta on the unit square, A = I
  const auto [lhs, rhs] = boundary_flux_sides({0, 1, 0, 1}, {0, 0, 1, 0}, {0, 0, 1, 0}, {1, 0, 0, 1});
  EXPECT_NEAR(rhs, 1.0 / 12, 1e-16);
  EXPECT_NEAR(lhs, 1.0 / 12, 1e-15);
  // v = xi has no twist: both sides vanish
  const auto [l2, r2] = boundary_flux_sides({0, 1, 0, 1}, {0.2, -0.4, 1, 0.5}, {0, 1, 1, 0}, {1.5, 0.3, -0.2, 2});
  EXPECT_EQ(r2, 0.0);
  EXPECT_NEAR(l2, 0.0, 1e-15);
}

TEST(Coercivity, RatiosDoNotDecreaseWithReaction) {
  const MeshPtr m = share(uniform_mesh(4));
  Rng r1(5, "coercivity_c"), r2(5, "coercivity_c");
  const OracleResult plain = check_coercivity(m, laplace_problem(), r1, 50, "c = 0");
  const OracleResult shifted = check_coercivity(m, laplace_problem("10"), r2, 50, "c = 10");
  ASSERT_TRUE(plain.statistic && shifted.statistic);
  EXPECT_GT(*plain.statistic, 0.0);
  EXPECT_GE(*shifted.statistic, *plain.statistic);
}
