#include <gtest/gtest.h>

#include <cmath>

#include "fvem/analysis.hpp"
#include "fvem/assembly.hpp"
#include "fvem/verify.hpp"

using namespace fvem;

// published rates come from unrounded errors; four significant digits in the
// inputs move the rate by up to 5e-4
TEST(Rates, Examples) {
  EXPECT_NEAR(*observed_rate(3.099e-1, 7.856e-2), 1.9802, 5e-4);
  EXPECT_EQ(*observed_rate(4.0, 1.0), 2.0);
  EXPECT_NEAR(*observed_rate(1.969e-2, 4.949e-3), 1.9926, 5e-4);
  EXPECT_FALSE(observed_rate(0.0, 1.0));
  EXPECT_FALSE(observed_rate(1.0, 0.0));
  EXPECT_FALSE(observed_rate(std::nullopt, 1.0));
}

TEST(Rates, TableNeedsTwoLevelsAndIsScaleInvariant) {
  EXPECT_THROW(rate_table(std::vector<double>{1.0}), std::invalid_argument);
  const std::vector<double> e{1.212, 3.099e-1, 7.856e-2, 1.969e-2};
  std::vector<double> scaled;
  for (const double v : e) scaled.push_back(37.5 * v);
  const auto a = rate_table(e), b = rate_table(scaled);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(*a[k], *b[k], 1e-13);
}

namespace {

ProblemData bilinear_problem(verify::Rng& rng) {
  ProblemData p = benchmark_problem();
  const auto b = verify::random_corners(rng);
  attach_exact_solution(p, expr::constant(b[0]) + expr::constant(b[1]) * expr::parse("x") +
                               expr::constant(b[2]) * expr::parse("y") + expr::constant(b[3]) * expr::parse("x*y"));
  return p;
}

}  // namespace

TEST(Errors, VanishForBilinearExactSolution) {
  verify::Rng rng(1, "bilinear_errors");
  for (int t = 0; t < 5; ++t) {
    const ProblemData p = bilinear_problem(rng);
    const MeshPtr m = verify::random_mesh(rng, 2, 6);
    const NodalField uh = interpolate(*p.u_exact, m);
    const StressPointError s = superconv_error(uh, p, stress_points(*m));
    EXPECT_LE(s.euclidean, 1e-13);
    const ErrorNorms en = error_norms(uh, p);
    EXPECT_LE(en.l2, 1e-12);
    EXPECT_LE(en.h1, 1e-12);
    EXPECT_LE(en.inf, 1e-12);
  }
}

TEST(Errors, PatchSolutionIsSuperclose) {
  verify::Rng rng(2, "patch_close");
  ProblemData p = bilinear_problem(rng);
  p.g = *p.u_exact;
  const DiscreteSolution sol = solve_system(assemble_fve(share(uniform_mesh(8)), p));
  EXPECT_LE(supercloseness(sol.field, p), 1e-10);
  EXPECT_LE(superconv_error(sol.field, p, stress_points(sol.field.mesh())).euclidean, 1e-9);
}

TEST(Errors, QuadraticInterpolationErrorOnUnitSquare) {
  ProblemData p = laplace_problem();
  attach_exact_solution(p, expr::parse("x^2"));
  const MeshPtr m = share(uniform_mesh(1));
  const ErrorNorms en = error_norms(interpolate(*p.u_exact, m), p);
  EXPECT_NEAR(en.l2, 1 / std::sqrt(30.0), 1e-15);
  EXPECT_NEAR(en.h1, 1 / std::sqrt(3.0), 1e-15);  // |2x - 1| in L2
  EXPECT_EQ(en.inf, 0.0);
}

TEST(Errors, RequireExactSolution) {
  const ProblemData p = laplace_problem();
  const NodalField uh(share(uniform_mesh(2)));
  EXPECT_THROW(error_norms(uh, p), MissingExactSolution);
  EXPECT_THROW(superconv_error(uh, p, stress_points(uh.mesh())), MissingExactSolution);
}

TEST(Errors, StressClassesAreReported) {
  const ProblemData p = benchmark_problem();
  const DiscreteSolution sol = solve_system(assemble_fve(share(uniform_mesh(16)), p));
  const StressPointError s = superconv_error(sol.field, p, stress_points(sol.field.mesh()));
  EXPECT_EQ(s.euclidean, std::max({s.node, s.edge, s.element}));
  EXPECT_LE(s.max_norm, s.euclidean);
  EXPECT_GE(s.max_norm * std::sqrt(2.0), s.euclidean);
}

// class-wise maxima converge at second order on the benchmark
TEST(Errors, ClasswiseRatesOnBenchmark) {
  const ProblemData p = benchmark_problem();
  StudyReport rep;
  for (const std::size_t n : {16u, 32u, 64u}) {
    const DiscreteSolution sol = solve_system(assemble_fve(share(uniform_mesh(n)), p));
    LevelErrors le;
    le.n = n;
    le.stress = superconv_error(sol.field, p, stress_points(sol.field.mesh()));
    rep.levels.push_back(le);
  }
  for (const ErrorColumn c : {ErrorColumn::stress_node, ErrorColumn::stress_edge, ErrorColumn::stress_element,
                              ErrorColumn::stress_max_norm})
    EXPECT_GE(*rep.rate(c, 2), 1.9);
}
