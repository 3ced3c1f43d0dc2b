/**
 * @file assembly.hpp
 * @brief Finite volume element and Galerkin bilinear forms on tensor meshes,
 * their global systems, and Dirichlet elimination.
 *
 * The control volume of a node P meets each surrounding element K in the
 * quarter of K adjacent to P. Inside K the control-volume boundaries form a
 * cross through the element center, made of four half-segments, each shared
 * by two corners. The balance for corner P restricted to K is
 *
 *     - sum over its two cross segments of  int n . (A grad u) ds
 *     + int_{quarter} c u   =   int_{quarter} f
 *
 * with n the outward normal of P's quarter. Summing over the elements around
 * an interior node gives its full control-volume equation.
 */
#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fvem/femspace.hpp"
#include "fvem/linalg.hpp"
#include "fvem/mesh.hpp"
#include "fvem/problem.hpp"
#include "fvem/quadrature.hpp"

namespace fvem {

struct QuadratureOrders {
  int flux = 3;    // per cross half-segment
  int volume = 3;  // per quarter, each direction
  int galerkin = 3;  // per element, each direction (Galerkin form)
  int norm = 4;    // per element, error norms
};

using LocalMatrix = std::array<std::array<double, 4>, 4>;

struct ElementSystem {
  LocalMatrix matrix{};               // matrix[a][b]: equation of corner a, trial function of corner b
  std::array<double, 4> load{};
};

namespace detail {

/// Evaluates the element-restricted balance of every corner for N trial
/// functions. `trial(p)` returns {values, gradients} of the N functions.
template <std::size_t N, class Trial>
std::array<std::array<double, N>, 4> element_balance(const Rect& k, const ProblemData& prob, const QuadratureOrders& q,
                                                     Trial&& trial) {
  std::array<std::array<double, N>, 4> rows{};
  const Point m = k.center();

  // Vertical half-segments x = m.x: left corner (0 or 3) has normal +x.
  const auto vertical = [&](double y0, double y1, int left, int right) {
    std::array<double, N> flux{};
    const auto& rule = quadrature::gauss_legendre(q.flux);
    const double half = 0.5 * (y1 - y0);
    for (int g = 0; g < rule.order; ++g) {
      const Point p{m.x, y0 + half * (1.0 + rule.points[g])};
      const double a11 = prob.a11(p.x, p.y);
      const double a12 = prob.a12(p.x, p.y);
      const auto [val, grad] = trial(p);
      for (std::size_t b = 0; b < N; ++b) flux[b] += rule.weights[g] * half * (a11 * grad[b][0] + a12 * grad[b][1]);
    }
    for (std::size_t b = 0; b < N; ++b) {
      rows[left][b] -= flux[b];
      rows[right][b] += flux[b];
    }
  };
  // Horizontal half-segments y = m.y: lower corner (0 or 1) has normal +y.
  const auto horizontal = [&](double x0, double x1, int lower, int upper) {
    std::array<double, N> flux{};
    const auto& rule = quadrature::gauss_legendre(q.flux);
    const double half = 0.5 * (x1 - x0);
    for (int g = 0; g < rule.order; ++g) {
      const Point p{x0 + half * (1.0 + rule.points[g]), m.y};
      const double a21 = prob.a21(p.x, p.y);
      const double a22 = prob.a22(p.x, p.y);
      const auto [val, grad] = trial(p);
      for (std::size_t b = 0; b < N; ++b) flux[b] += rule.weights[g] * half * (a21 * grad[b][0] + a22 * grad[b][1]);
    }
    for (std::size_t b = 0; b < N; ++b) {
      rows[lower][b] -= flux[b];
      rows[upper][b] += flux[b];
    }
  };
  vertical(k.y0, m.y, 0, 1);
  vertical(m.y, k.y1, 3, 2);
  horizontal(k.x0, m.x, 0, 3);
  horizontal(m.x, k.x1, 1, 2);

  const std::array<Rect, 4> quarters{Rect{k.x0, m.x, k.y0, m.y}, Rect{m.x, k.x1, k.y0, m.y},
                                     Rect{m.x, k.x1, m.y, k.y1}, Rect{k.x0, m.x, m.y, k.y1}};
  for (int a = 0; a < 4; ++a) {
    quadrature::for_each_rect_point(quarters[a], q.volume, q.volume, [&](Point p, double w) {
      const double c = prob.c(p.x, p.y);
      if (c == 0.0) return;
      const auto [val, grad] = trial(p);
      for (std::size_t b = 0; b < N; ++b) rows[a][b] += w * c * val[b];
    });
  }
  return rows;
}

inline auto basis_trial(const Rect& k) {
  return [k](Point p) {
    const ShapeValues s = detail::shape_unchecked(k, p);
    return std::pair{s.value, s.grad};
  };
}

}  // namespace detail

/// Local finite volume element matrix and load of one element.
inline ElementSystem fve_element(const TensorMesh& mesh, const ProblemData& prob, std::size_t elem,
                                 const QuadratureOrders& q = {}) {
  const Rect k = mesh.element_rect(elem);
  ElementSystem es;
  es.matrix = detail::element_balance<4>(k, prob, q, detail::basis_trial(k));
  const Point m = k.center();
  const std::array<Rect, 4> quarters{Rect{k.x0, m.x, k.y0, m.y}, Rect{m.x, k.x1, k.y0, m.y},
                                     Rect{m.x, k.x1, m.y, k.y1}, Rect{k.x0, m.x, m.y, k.y1}};
  for (int a = 0; a < 4; ++a)
    es.load[a] = quadrature::integrate_rect([&](Point p) { return prob.f(p.x, p.y); }, quarters[a], q.volume, q.volume);
  return es;
}

/// Local Galerkin stiffness + mass matrix and load of one element.
inline ElementSystem galerkin_element(const TensorMesh& mesh, const ProblemData& prob, std::size_t elem,
                                      const QuadratureOrders& q = {}) {
  const Rect k = mesh.element_rect(elem);
  ElementSystem es;
  quadrature::for_each_rect_point(k, q.galerkin, q.galerkin, [&](Point p, double w) {
    const ShapeValues s = detail::shape_unchecked(k, p);
    const double a11 = prob.a11(p.x, p.y), a12 = prob.a12(p.x, p.y);
    const double a21 = prob.a21(p.x, p.y), a22 = prob.a22(p.x, p.y);
    const double c = prob.c(p.x, p.y);
    const double f = prob.f(p.x, p.y);
    for (int b = 0; b < 4; ++b) {
      const double qx = a11 * s.grad[b][0] + a12 * s.grad[b][1];
      const double qy = a21 * s.grad[b][0] + a22 * s.grad[b][1];
      for (int a = 0; a < 4; ++a)
        es.matrix[a][b] += w * (qx * s.grad[a][0] + qy * s.grad[a][1] + c * s.value[b] * s.value[a]);
    }
    for (int a = 0; a < 4; ++a) es.load[a] += w * f * s.value[a];
  });
  return es;
}

/// Element systems for a whole mesh; evaluates the discrete forms directly.
class ElementOperator {
 public:
  template <class Builder>
  ElementOperator(MeshPtr mesh, Builder&& build) : mesh_(std::move(mesh)) {
    elems_.reserve(mesh_->num_elements());
    for (std::size_t e = 0; e < mesh_->num_elements(); ++e) elems_.push_back(build(*mesh_, e));
  }

  const TensorMesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  const ElementSystem& element(std::size_t e) const { return elems_[e]; }

  /// sum over K of v_K^T M_K w_K; boundary test coefficients are zeroed when `zero_boundary_test`.
  double form(const NodalField& w, const NodalField& v, bool zero_boundary_test) const {
    double s = 0.0;
    for (std::size_t e = 0; e < elems_.size(); ++e) {
      const auto nodes = mesh_->element_nodes(e);
      for (int a = 0; a < 4; ++a) {
        if (zero_boundary_test && mesh_->is_boundary(nodes[a])) continue;
        double row = 0.0;
        for (int b = 0; b < 4; ++b) row += elems_[e].matrix[a][b] * w[nodes[b]];
        s += v[nodes[a]] * row;
      }
    }
    return s;
  }

 private:
  MeshPtr mesh_;
  std::vector<ElementSystem> elems_;
};

inline ElementOperator fve_operator(MeshPtr mesh, const ProblemData& prob, const QuadratureOrders& q = {}) {
  return ElementOperator(std::move(mesh), [&](const TensorMesh& m, std::size_t e) { return fve_element(m, prob, e, q); });
}

inline ElementOperator galerkin_operator(MeshPtr mesh, const ProblemData& prob, const QuadratureOrders& q = {}) {
  return ElementOperator(std::move(mesh),
                         [&](const TensorMesh& m, std::size_t e) { return galerkin_element(m, prob, e, q); });
}

/// a_h(w, Pi*_h v) for trial field w and test coefficients v.
inline double fve_form(const ElementOperator& op, const NodalField& w, const NodalField& v) {
  return op.form(w, v, true);
}

/// a(w, v).
inline double galerkin_form(const ElementOperator& op, const NodalField& w, const NodalField& v) {
  return op.form(w, v, false);
}

/// a_h(u, Pi*_h v) for a smooth u given by value and gradient callables.
template <class Value, class Gradient>
double fve_form_smooth(const TensorMesh& mesh, const ProblemData& prob, Value&& u, Gradient&& grad_u,
                       const NodalField& v, const QuadratureOrders& q = {}) {
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto rows = detail::element_balance<1>(mesh.element_rect(e), prob, q, [&](Point p) {
      return std::pair{std::array<double, 1>{u(p)}, std::array<Vec2, 1>{grad_u(p)}};
    });
    const auto nodes = mesh.element_nodes(e);
    for (int a = 0; a < 4; ++a)
      if (!mesh.is_boundary(nodes[a])) s += v[nodes[a]] * rows[a][0];
  }
  return s;
}

// ---------------------------------------------------------------------------
// Global systems

/// Node-level system: rows of interior nodes only, columns over all nodes.
struct NodeSystem {
  MeshPtr mesh;
  linalg::SparseMatrix matrix;  // num_nodes x num_nodes
  linalg::Vector rhs;           // num_nodes, zero at boundary rows
};

inline NodeSystem assemble_nodes(const ElementOperator& op) {
  const TensorMesh& mesh = op.mesh();
  std::vector<linalg::Triplet> trip;
  trip.reserve(16 * mesh.num_elements());
  linalg::Vector rhs(mesh.num_nodes(), 0.0);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    const ElementSystem& es = op.element(e);
    for (int a = 0; a < 4; ++a) {
      if (mesh.is_boundary(nodes[a])) continue;
      rhs[nodes[a]] += es.load[a];
      for (int b = 0; b < 4; ++b) trip.push_back({nodes[a], nodes[b], es.matrix[a][b]});
    }
  }
  return {op.mesh_ptr(), linalg::from_triplets(mesh.num_nodes(), std::move(trip)), std::move(rhs)};
}

/// Square system over interior unknowns after Dirichlet elimination.
struct ReducedSystem {
  MeshPtr mesh;
  linalg::SparseMatrix matrix;
  linalg::Vector rhs;
  std::vector<std::size_t> node_of_unknown;
  std::vector<std::size_t> unknown_of_node;  // npos at boundary nodes
  std::vector<double> boundary_values;      // g at boundary nodes, 0 elsewhere

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  std::size_t size() const { return node_of_unknown.size(); }
};

using FveSystem = ReducedSystem;
using FemSystem = ReducedSystem;

/// Fixes boundary nodes to g and moves their columns to the right-hand side.
template <class G>
ReducedSystem apply_dirichlet(const NodeSystem& sys, G&& g) {
  const TensorMesh& mesh = *sys.mesh;
  ReducedSystem out;
  out.mesh = sys.mesh;
  out.unknown_of_node.assign(mesh.num_nodes(), ReducedSystem::npos);
  out.boundary_values.assign(mesh.num_nodes(), 0.0);
  for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
    if (mesh.is_boundary(n)) {
      const Point p = mesh.node_point(n);
      out.boundary_values[n] = g(p.x, p.y);
    } else {
      out.unknown_of_node[n] = out.node_of_unknown.size();
      out.node_of_unknown.push_back(n);
    }
  }
  std::vector<linalg::Triplet> trip;
  trip.reserve(sys.matrix.nonzeros());
  out.rhs.resize(out.size());
  for (std::size_t u = 0; u < out.size(); ++u) {
    const std::size_t n = out.node_of_unknown[u];
    double r = sys.rhs[n];
    const auto cols = sys.matrix.row_cols(n);
    const auto vals = sys.matrix.row_values(n);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const std::size_t un = out.unknown_of_node[cols[k]];
      if (un == ReducedSystem::npos) r -= vals[k] * out.boundary_values[cols[k]];
      else trip.push_back({u, un, vals[k]});
    }
    out.rhs[u] = r;
  }
  out.matrix = linalg::from_triplets(out.size(), std::move(trip));
  return out;
}

inline FveSystem assemble_fve(const MeshPtr& mesh, const ProblemData& prob, const QuadratureOrders& q = {}) {
  return apply_dirichlet(assemble_nodes(fve_operator(mesh, prob, q)), prob.g);
}

inline FemSystem assemble_fem(const MeshPtr& mesh, const ProblemData& prob, const QuadratureOrders& q = {}) {
  return apply_dirichlet(assemble_nodes(galerkin_operator(mesh, prob, q)), prob.g);
}

/// Nodal field from interior unknowns plus the stored boundary values.
inline NodalField expand_solution(const ReducedSystem& sys, std::span<const double> x) {
  std::vector<double> v = sys.boundary_values;
  for (std::size_t u = 0; u < sys.size(); ++u) v[sys.node_of_unknown[u]] = x[u];
  return {sys.mesh, std::move(v)};
}

struct DiscreteSolution {
  NodalField field;
  linalg::SolveReport report;
};

inline DiscreteSolution solve_system(const ReducedSystem& sys, const linalg::SolveOptions& opts = {}) {
  auto [x, rep] = linalg::solve(sys.matrix, sys.rhs, opts);
  return {expand_solution(sys, x), rep};
}

}  // namespace fvem
