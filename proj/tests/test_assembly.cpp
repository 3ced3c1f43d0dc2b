#include <gtest/gtest.h>

#include <cmath>

#include "fvem/assembly.hpp"
#include "fvem/verify.hpp"

using namespace fvem;

namespace {

std::size_t unknown(const ReducedSystem& s, std::size_t i, std::size_t j) {
  return s.unknown_of_node[s.mesh->node_id(i, j)];
}

}  // namespace

// hand integration of the Laplacian fluxes over a square control volume
TEST(Fve, LaplaceStencilOnUniformMesh) {
  for (const std::size_t n : {4u, 7u}) {
    const FveSystem s = assemble_fve(share(uniform_mesh(n)), laplace_problem());
    const std::size_t c = unknown(s, 2, 2);
    EXPECT_NEAR(s.matrix.at(c, c), 3.0, 1e-14);
    for (const auto& [i, j] : {std::pair{1, 2}, {3, 2}, {2, 1}, {2, 3}}) EXPECT_NEAR(s.matrix.at(c, unknown(s, i, j)), -0.5, 1e-14);
    for (const auto& [i, j] : {std::pair{1, 1}, {3, 1}, {1, 3}, {3, 3}}) EXPECT_NEAR(s.matrix.at(c, unknown(s, i, j)), -0.25, 1e-14);
  }
}

// per-element row of the Laplacian on an hx x hy rectangle
TEST(Fve, LaplaceElementRowOnRectangle) {
  const double hx = 0.3, hy = 0.2;
  const TensorMesh m = build_tensor_mesh({0, hx}, {0, hy});
  const ElementSystem es = fve_element(m, laplace_problem(), 0, {});
  const double r = hy / hx, s = hx / hy;
  EXPECT_NEAR(es.matrix[0][0], 3.0 / 8 * (r + s), 1e-14);
  EXPECT_NEAR(es.matrix[0][1], -3.0 / 8 * r + 1.0 / 8 * s, 1e-14);
  EXPECT_NEAR(es.matrix[0][2], -1.0 / 8 * (r + s), 1e-14);
  EXPECT_NEAR(es.matrix[0][3], 1.0 / 8 * r - 3.0 / 8 * s, 1e-14);
  for (int a = 0; a < 4; ++a) {
    double row = 0.0;
    for (int b = 0; b < 4; ++b) row += es.matrix[a][b];
    EXPECT_NEAR(row, 0.0, 1e-14);  // constants carry no flux
  }
}

// reaction term: integral of each basis function over each quarter
TEST(Fve, ReactionBlockOnUnitSquare) {
  const TensorMesh m = uniform_mesh(1);
  ProblemData p = laplace_problem("1");
  p.a11 = p.a22 = expr::constant(0.0);
  const ElementSystem es = fve_element(m, p, 0, {});
  EXPECT_NEAR(es.matrix[0][0], 9.0 / 64, 1e-15);
  EXPECT_NEAR(es.matrix[0][1], 3.0 / 64, 1e-15);
  EXPECT_NEAR(es.matrix[0][2], 1.0 / 64, 1e-15);
  EXPECT_NEAR(es.matrix[0][3], 3.0 / 64, 1e-15);
}

TEST(Fve, HomogeneousProblemHasZeroSolution) {
  ProblemData p = benchmark_problem();
  p.f = expr::constant(0.0);
  const DiscreteSolution sol = solve_system(assemble_fve(share(uniform_mesh(8)), p));
  for (const double v : sol.field.values()) EXPECT_EQ(v, 0.0);
}

TEST(Fve, PatchTestReproducesBilinear) {
  verify::Rng rng(1, "patch");
  ProblemData p = laplace_problem();
  attach_exact_solution(p, expr::parse("x*y"));
  p.g = expr::parse("x*y");
  std::vector<MeshPtr> meshes;
  for (const std::size_t n : {2u, 4u, 8u, 16u, 32u}) meshes.push_back(share(uniform_mesh(n)));
  meshes.push_back(verify::random_mesh(rng, 5, 20));
  for (const MeshPtr& m : meshes) {
    const DiscreteSolution sol = solve_system(assemble_fve(m, p));
    const NodalField exact = interpolate(*p.u_exact, m);
    double worst = 0.0;
    for (std::size_t n = 0; n < m->num_nodes(); ++n) worst = std::max(worst, std::abs(sol.field[n] - exact[n]));
    EXPECT_LE(worst, 1e-10) << m->nx() << "x" << m->ny();
  }
}

TEST(Fve, SparsityAtMostNinePerRow) {
  verify::Rng rng(2, "sparsity");
  const FveSystem s = assemble_fve(verify::random_mesh(rng, 4, 9), benchmark_problem());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_LE(s.matrix.row_cols(i).size(), 9u);
}

// a_h(u - u_h, Pi*v) vanishes up to quadrature error once u_h solves the system
TEST(Fve, ErrorEquationConsistency) {
  verify::Rng rng(3, "consistency");
  const ProblemData p = benchmark_problem();
  QuadratureOrders q;
  q.flux = q.volume = 6;
  const MeshPtr m = share(uniform_mesh(16));
  const ElementOperator op = fve_operator(m, p, q);
  const NodeSystem nodes = assemble_nodes(op);
  linalg::SolveOptions tight;
  tight.tol = 1e-13;
  const DiscreteSolution sol = solve_system(apply_dirichlet(nodes, p.g), tight);
  const auto u = [&](Point x) { return (*p.u_exact)(x.x, x.y); };
  const auto grad = [&](Point x) { return p.exact_gradient(x); };
  for (int t = 0; t < 10; ++t) {
    const NodalField v = verify::random_field(rng, m, true);
    const double au = fve_form_smooth(*m, p, u, grad, v, q);
    const double auh = fve_form(op, sol.field, v);
    const double load = linalg::dot(nodes.rhs, v.values());
    EXPECT_LE(std::abs(au - auh), 1e-8 * std::abs(load));
  }
}

TEST(Fem, UnitSquareEntries) {
  const TensorMesh m = uniform_mesh(1);
  const ElementSystem k = galerkin_element(m, laplace_problem(), 0, {});
  EXPECT_NEAR(k.matrix[0][0], 2.0 / 3, 1e-15);
  EXPECT_NEAR(k.matrix[0][1], -1.0 / 6, 1e-15);
  EXPECT_NEAR(k.matrix[0][2], -1.0 / 3, 1e-15);
  ProblemData mass = laplace_problem("1");
  mass.a11 = mass.a22 = expr::constant(0.0);
  const ElementSystem mm = galerkin_element(m, mass, 0, {});
  EXPECT_NEAR(mm.matrix[0][0], 1.0 / 9, 1e-15);
  EXPECT_NEAR(mm.matrix[0][2], 1.0 / 36, 1e-15);
}

TEST(Fem, SymmetricCoefficientsGiveSymmetricMatrix) {
  verify::Rng rng(4, "fem_sym");
  const FemSystem s = assemble_fem(verify::random_mesh(rng, 4, 8), benchmark_problem());
  for (std::size_t i = 0; i < s.size(); ++i)
    for (const std::size_t j : s.matrix.row_cols(i)) EXPECT_NEAR(s.matrix.at(i, j), s.matrix.at(j, i), 1e-12);
}

TEST(Fve, NotSymmetricForVariableCoefficients) {
  const FveSystem s = assemble_fve(share(uniform_mesh(6)), benchmark_problem());
  double asym = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (const std::size_t j : s.matrix.row_cols(i)) asym = std::max(asym, std::abs(s.matrix.at(i, j) - s.matrix.at(j, i)));
  EXPECT_GT(asym, 1e-6);
}

TEST(Dirichlet, Examples) {
  const MeshPtr m = share(uniform_mesh(2));
  ProblemData p = laplace_problem();
  p.f = expr::constant(1.0);
  const NodeSystem nodes = assemble_nodes(fve_operator(m, p));
  const ReducedSystem zero = apply_dirichlet(nodes, expr::constant(0.0));
  ASSERT_EQ(zero.size(), 1u);
  EXPECT_EQ(zero.rhs[0], nodes.rhs[m->node_id(1, 1)]);
  const ReducedSystem one = apply_dirichlet(nodes, expr::constant(1.0));
  // all boundary values 1: the row sum of the Laplacian is zero so the constant solves it with f = 0
  EXPECT_NEAR(one.rhs[0] - zero.rhs[0], 3.0, 1e-14);
}
