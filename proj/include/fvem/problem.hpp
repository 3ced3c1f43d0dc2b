/**
 * @file problem.hpp
 * @brief Coefficient data of  -div(A grad u) + c u = f  with Dirichlet data g,
 * and the manufactured source for a prescribed exact solution.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "fvem/expr.hpp"
#include "fvem/geometry.hpp"

namespace fvem {

struct ProblemData {
  expr::Expr a11, a12, a21, a22;
  expr::Expr c;
  expr::Expr f;
  std::optional<expr::Expr> u_exact;
  std::optional<expr::Expr> ux_exact;
  std::optional<expr::Expr> uy_exact;
  expr::Expr g = expr::constant(0.0);

  bool has_exact() const { return u_exact.has_value(); }

  /// Flux vector A * grad at (x, y).
  Vec2 flux(Point p, Vec2 grad) const {
    return {a11(p.x, p.y) * grad[0] + a12(p.x, p.y) * grad[1], a21(p.x, p.y) * grad[0] + a22(p.x, p.y) * grad[1]};
  }

  Vec2 exact_gradient(Point p) const {
    if (!ux_exact || !uy_exact) throw std::logic_error("problem has no exact solution");
    return {(*ux_exact)(p.x, p.y), (*uy_exact)(p.x, p.y)};
  }
};

class MissingExactSolution : public std::invalid_argument {
 public:
  MissingExactSolution() : std::invalid_argument("an exact solution u_exact is required") {}
};

/// f = -[d/dx (a11 ux + a12 uy) + d/dy (a21 ux + a22 uy)] + c u, built symbolically.
inline expr::Expr manufactured_source(const ProblemData& p) {
  using expr::differentiate;
  using expr::Var;
  if (!p.u_exact) throw MissingExactSolution();
  const expr::Expr& u = *p.u_exact;
  const expr::Expr ux = p.ux_exact ? *p.ux_exact : differentiate(u, Var::x);
  const expr::Expr uy = p.uy_exact ? *p.uy_exact : differentiate(u, Var::y);
  const expr::Expr qx = p.a11 * ux + p.a12 * uy;
  const expr::Expr qy = p.a21 * ux + p.a22 * uy;
  return -(differentiate(qx, Var::x) + differentiate(qy, Var::y)) + p.c * u;
}

/// Fills the exact gradient and, when `derive_source`, the manufactured f.
inline void attach_exact_solution(ProblemData& p, expr::Expr u, bool derive_source = true) {
  p.ux_exact = expr::differentiate(u, expr::Var::x);
  p.uy_exact = expr::differentiate(u, expr::Var::y);
  p.u_exact = std::move(u);
  if (derive_source) p.f = manufactured_source(p);
}

/// Sampled ellipticity and sign checks on a uniform grid of the domain.
struct CoefficientCheck {
  double min_eigenvalue = std::numeric_limits<double>::infinity();  // of the symmetric part of A
  double max_eigenvalue = -std::numeric_limits<double>::infinity();
  double min_c = std::numeric_limits<double>::infinity();

  bool elliptic() const { return min_eigenvalue > 0.0; }
  bool reaction_nonnegative() const { return min_c >= 0.0; }
};

inline CoefficientCheck sample_coefficients(const ProblemData& p, Rect domain, int samples = 33) {
  CoefficientCheck chk;
  for (int j = 0; j < samples; ++j) {
    for (int i = 0; i < samples; ++i) {
      const double x = domain.x0 + domain.width() * i / (samples - 1);
      const double y = domain.y0 + domain.height() * j / (samples - 1);
      const double s11 = p.a11(x, y);
      const double s22 = p.a22(x, y);
      const double s12 = 0.5 * (p.a12(x, y) + p.a21(x, y));
      const double mean = 0.5 * (s11 + s22);
      const double rad = std::hypot(0.5 * (s11 - s22), s12);
      chk.min_eigenvalue = std::min(chk.min_eigenvalue, mean - rad);
      chk.max_eigenvalue = std::max(chk.max_eigenvalue, mean + rad);
      chk.min_c = std::min(chk.min_c, p.c(x, y));
    }
  }
  return chk;
}

/// Coefficients, domain and exact solution of the published benchmark.
inline ProblemData benchmark_problem() {
  ProblemData p;
  p.a11 = expr::parse("exp(2*x)+y^3+1");
  p.a12 = expr::parse("exp(x+y)");
  p.a21 = expr::parse("exp(x+y)");
  p.a22 = expr::parse("exp(2*y)+x^3+1");
  p.c = expr::parse("2+x+y");
  attach_exact_solution(p, expr::parse("2*sin(2*pi*x)*sin(3*pi*y)"));
  return p;
}

/// -div(grad u) + c u = f with A = I.
inline ProblemData laplace_problem(const std::string& c = "0") {
  ProblemData p;
  p.a11 = expr::constant(1.0);
  p.a12 = expr::constant(0.0);
  p.a21 = expr::constant(0.0);
  p.a22 = expr::constant(1.0);
  p.c = expr::parse(c);
  return p;
}

}  // namespace fvem
