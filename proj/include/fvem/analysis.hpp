/**
 * @file analysis.hpp
 * @brief Error measurement against an exact solution and observed rates.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fvem/femspace.hpp"
#include "fvem/linalg.hpp"
#include "fvem/mesh.hpp"
#include "fvem/problem.hpp"
#include "fvem/quadrature.hpp"

namespace fvem {

/// Max over the stress point set of the averaged-gradient error.
struct StressPointError {
  double euclidean = 0.0;  // max |grad u - avg grad u_h|_2
  double max_norm = 0.0;   // max |grad u - avg grad u_h|_inf
  double node = 0.0;       // class-wise maxima of the Euclidean error
  double edge = 0.0;
  double element = 0.0;
};

inline StressPointError superconv_error(const NodalField& uh, const ProblemData& prob, const StressPointSet& s) {
  if (!prob.has_exact()) throw MissingExactSolution();
  StressPointError out;
  s.for_each([&](const StressPoint& sp) {
    const Vec2 exact = prob.exact_gradient(sp.at);
    const Vec2 approx = averaged_gradient(uh, sp);
    const double dx = exact[0] - approx[0];
    const double dy = exact[1] - approx[1];
    const double e2 = std::hypot(dx, dy);
    out.euclidean = std::max(out.euclidean, e2);
    out.max_norm = std::max(out.max_norm, std::max(std::abs(dx), std::abs(dy)));
    double& cls = sp.kind == StressClass::interior_node   ? out.node
                  : sp.kind == StressClass::edge_midpoint ? out.edge
                                                          : out.element;
    cls = std::max(cls, e2);
  });
  return out;
}

struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0;   // seminorm
  double inf = 0.0;  // max nodal error
};

inline ErrorNorms error_norms(const NodalField& uh, const ProblemData& prob, int order = 4) {
  if (!prob.has_exact()) throw MissingExactSolution();
  const TensorMesh& mesh = uh.mesh();
  const expr::Expr& u = *prob.u_exact;
  double l2 = 0.0, h1 = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    quadrature::for_each_rect_point(mesh.element_rect(e), order, order, [&](Point p, double w) {
      const double d = u(p.x, p.y) - uh.value_on(e, p);
      const Vec2 ge = prob.exact_gradient(p);
      const Vec2 gh = uh.gradient_on(e, p);
      l2 += w * d * d;
      h1 += w * ((ge[0] - gh[0]) * (ge[0] - gh[0]) + (ge[1] - gh[1]) * (ge[1] - gh[1]));
    });
  }
  double inf = 0.0;
  for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
    const Point p = mesh.node_point(n);
    inf = std::max(inf, std::abs(u(p.x, p.y) - uh[n]));
  }
  return {std::sqrt(l2), std::sqrt(h1), inf};
}

/// ||Pi_h u - u_h||_1 (L2 part plus seminorm).
inline double supercloseness(const NodalField& uh, const ProblemData& prob, int order = 4) {
  if (!prob.has_exact()) throw MissingExactSolution();
  const NodalField diff = interpolate(*prob.u_exact, uh.mesh_ptr()) - uh;
  return h1_norm(diff, order);
}

struct LevelErrors {
  std::size_t n = 0;  // elements per direction
  double h = 0.0;     // max element diameter
  std::size_t dof = 0;
  std::optional<StressPointError> stress;  // absent without an exact solution
  std::optional<double> e_l2, e_h1, e_close, e_inf;
  linalg::SolveReport solve;

  std::optional<double> e_s() const {
    if (!stress) return std::nullopt;
    return stress->euclidean;
  }
};

/// ln(e_h / e_{h/2}) / ln 2, undefined when either error is zero or absent.
inline std::optional<double> observed_rate(std::optional<double> coarse, std::optional<double> fine) {
  if (!coarse || !fine || !(*coarse > 0.0) || !(*fine > 0.0)) return std::nullopt;
  return std::log(*coarse / *fine) / std::log(2.0);
}

enum class ErrorColumn { stress, l2, h1, close, inf, stress_max_norm, stress_node, stress_edge, stress_element };

inline std::optional<double> column_value(const LevelErrors& l, ErrorColumn c) {
  switch (c) {
    case ErrorColumn::stress: return l.e_s();
    case ErrorColumn::l2: return l.e_l2;
    case ErrorColumn::h1: return l.e_h1;
    case ErrorColumn::close: return l.e_close;
    case ErrorColumn::inf: return l.e_inf;
    case ErrorColumn::stress_max_norm: return l.stress ? std::optional(l.stress->max_norm) : std::nullopt;
    case ErrorColumn::stress_node: return l.stress ? std::optional(l.stress->node) : std::nullopt;
    case ErrorColumn::stress_edge: return l.stress ? std::optional(l.stress->edge) : std::nullopt;
    case ErrorColumn::stress_element: return l.stress ? std::optional(l.stress->element) : std::nullopt;
  }
  return std::nullopt;
}

struct StudyReport {
  std::vector<LevelErrors> levels;

  /// Rate between level k-1 and k, for k >= 1.
  std::optional<double> rate(ErrorColumn c, std::size_t k) const {
    if (k == 0 || k >= levels.size()) return std::nullopt;
    return observed_rate(column_value(levels[k - 1], c), column_value(levels[k], c));
  }

  std::vector<std::optional<double>> rates(ErrorColumn c) const {
    std::vector<std::optional<double>> r;
    for (std::size_t k = 1; k < levels.size(); ++k) r.push_back(rate(c, k));
    return r;
  }
};

/// Rates for a plain error sequence (one per adjacent pair).
inline std::vector<std::optional<double>> rate_table(const std::vector<double>& errors) {
  if (errors.size() < 2) throw std::invalid_argument("rate_table needs at least two levels");
  std::vector<std::optional<double>> r;
  for (std::size_t k = 1; k < errors.size(); ++k) r.push_back(observed_rate(errors[k - 1], errors[k]));
  return r;
}

inline StudyReport rate_table(std::vector<LevelErrors> levels) {
  if (levels.size() < 2) throw std::invalid_argument("rate_table needs at least two levels");
  return {std::move(levels)};
}

}  // namespace fvem
