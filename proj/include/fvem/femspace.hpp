/**
 * @file femspace.hpp
 * @brief Continuous bilinear trial fields, piecewise-constant test fields on
 * the dual partition, and the operators connecting them.
 *
 * On an element K = [x1, x1 + hx] x [y1, y1 + hy] with corner values w1..w4
 * (counterclockwise from the lower-left corner) and local coordinates
 * xi = (x - x1) / hx, eta = (y - y1) / hy:
 *
 *     w(x, y) = w1 + (w2 - w1) xi + (w4 - w1) eta + (w3 + w1 - w2 - w4) xi eta
 */
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fvem/geometry.hpp"
#include "fvem/mesh.hpp"
#include "fvem/quadrature.hpp"

namespace fvem {

using MeshPtr = std::shared_ptr<const TensorMesh>;

inline MeshPtr share(TensorMesh mesh) { return std::make_shared<const TensorMesh>(std::move(mesh)); }

struct ShapeValues {
  std::array<double, 4> value;
  std::array<Vec2, 4> grad;
};

class PointOutsideElement : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

namespace detail {
inline ShapeValues shape_unchecked(const Rect& k, Point p) {
  const double hx = k.width();
  const double hy = k.height();
  const double xi = (p.x - k.x0) / hx;
  const double eta = (p.y - k.y0) / hy;
  ShapeValues s;
  s.value = {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
  s.grad = {Vec2{-(1 - eta) / hx, -(1 - xi) / hy}, Vec2{(1 - eta) / hx, -xi / hy}, Vec2{eta / hx, xi / hy},
            Vec2{-eta / hx, (1 - xi) / hy}};
  return s;
}
}  // namespace detail

/// Values and gradients of the four corner basis functions of K at p.
inline ShapeValues shape_eval(const Rect& k, Point p) {
  const double tol = 1e-12 * std::max(k.width(), k.height());
  if (!k.contains(p, tol)) throw PointOutsideElement("shape_eval: point lies outside the element");
  return detail::shape_unchecked(k, p);
}

/// Continuous piecewise-bilinear field given by its nodal values.
class NodalField {
 public:
  NodalField(MeshPtr mesh, std::vector<double> values) : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (values_.size() != mesh_->num_nodes()) throw std::invalid_argument("NodalField: one value per node required");
  }
  explicit NodalField(MeshPtr mesh) : NodalField(mesh, std::vector<double>(mesh->num_nodes(), 0.0)) {}

  const TensorMesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](std::size_t node) const { return values_[node]; }

  std::array<double, 4> corner_values(std::size_t elem) const {
    const auto n = mesh_->element_nodes(elem);
    return {values_[n[0]], values_[n[1]], values_[n[2]], values_[n[3]]};
  }

  double value_on(std::size_t elem, Point p) const {
    const auto s = detail::shape_unchecked(mesh_->element_rect(elem), p);
    const auto w = corner_values(elem);
    return s.value[0] * w[0] + s.value[1] * w[1] + s.value[2] * w[2] + s.value[3] * w[3];
  }

  /// Gradient of the restriction to `elem`, evaluated at p (closure of elem).
  Vec2 gradient_on(std::size_t elem, Point p) const {
    const auto s = detail::shape_unchecked(mesh_->element_rect(elem), p);
    const auto w = corner_values(elem);
    Vec2 g{0.0, 0.0};
    for (int a = 0; a < 4; ++a) {
      g[0] += s.grad[a][0] * w[a];
      g[1] += s.grad[a][1] * w[a];
    }
    return g;
  }

  double operator()(Point p) const { return value_on(mesh_->locate(p), p); }
  double operator()(double x, double y) const { return (*this)(Point{x, y}); }

  /// Constant second mixed derivative on `elem`.
  double mixed_derivative(std::size_t elem) const {
    const auto w = corner_values(elem);
    const Rect r = mesh_->element_rect(elem);
    return (w[2] + w[0] - w[1] - w[3]) / (r.width() * r.height());
  }

  NodalField operator-(const NodalField& o) const {
    std::vector<double> d(values_.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = values_[k] - o.values_[k];
    return {mesh_, std::move(d)};
  }

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
};

/// Nodal interpolant of fn(x, y).
template <class Fn>
NodalField interpolate(Fn&& fn, const MeshPtr& mesh) {
  std::vector<double> v(mesh->num_nodes());
  for (std::size_t n = 0; n < v.size(); ++n) {
    const Point p = mesh->node_point(n);
    v[n] = fn(p.x, p.y);
  }
  return {mesh, std::move(v)};
}

/// Piecewise constant on control volumes; zero on those of boundary nodes.
class DualField {
 public:
  DualField(MeshPtr mesh, std::vector<double> values) : mesh_(std::move(mesh)), values_(std::move(values)) {
    for (std::size_t n = 0; n < values_.size(); ++n)
      if (mesh_->is_boundary(n)) values_[n] = 0.0;
  }

  const TensorMesh& mesh() const { return *mesh_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t node) const { return values_[node]; }

  double operator()(Point p) const { return values_[locate_dual(*mesh_, p)]; }

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
};

/// Maps a trial field to the test field with the same nodal values.
inline DualField pi_star(const NodalField& v) { return {v.mesh_ptr(), v.values()}; }

/// Per-element mean value (1/|K|) * integral of fn over K, by 4x4 Gauss.
template <class Fn>
std::vector<double> cell_average(Fn&& fn, const TensorMesh& mesh, int order = 4) {
  std::vector<double> avg(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Rect r = mesh.element_rect(e);
    avg[e] = quadrature::integrate_rect([&](Point p) { return fn(p.x, p.y); }, r, order, order) / r.area();
  }
  return avg;
}

/// (w2-w1)^2 + (w3-w2)^2 + (w3-w4)^2 + (w4-w1)^2
inline double discrete_h1_element_sq(const std::array<double, 4>& w) {
  const double d21 = w[1] - w[0];
  const double d32 = w[2] - w[1];
  const double d34 = w[2] - w[3];
  const double d41 = w[3] - w[0];
  return d21 * d21 + d32 * d32 + d34 * d34 + d41 * d41;
}

inline double discrete_h1_seminorm(const NodalField& v) {
  double s = 0.0;
  for (std::size_t e = 0; e < v.mesh().num_elements(); ++e) s += discrete_h1_element_sq(v.corner_values(e));
  return std::sqrt(s);
}

/// Squared H1 seminorm of v on one element, by Gauss quadrature.
inline double h1_seminorm_sq(const NodalField& v, std::size_t elem, int order = 4) {
  double s = 0.0;
  quadrature::for_each_rect_point(v.mesh().element_rect(elem), order, order, [&](Point p, double w) {
    const Vec2 g = v.gradient_on(elem, p);
    s += w * (g[0] * g[0] + g[1] * g[1]);
  });
  return s;
}

/// Squared L2 norm of v on one element, by Gauss quadrature.
inline double l2_norm_sq(const NodalField& v, std::size_t elem, int order = 4) {
  double s = 0.0;
  quadrature::for_each_rect_point(v.mesh().element_rect(elem), order, order, [&](Point p, double w) {
    const double val = v.value_on(elem, p);
    s += w * val * val;
  });
  return s;
}

/// Full H1 norm (L2 part plus seminorm) over the mesh.
inline double h1_norm(const NodalField& v, int order = 4) {
  double s = 0.0;
  for (std::size_t e = 0; e < v.mesh().num_elements(); ++e) s += l2_norm_sq(v, e, order) + h1_seminorm_sq(v, e, order);
  return std::sqrt(s);
}

class NotAStressPoint : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Arithmetic mean of the one-sided gradients of u_h over the elements
/// listed for the stress point.
inline Vec2 averaged_gradient(const NodalField& uh, const StressPoint& sp) {
  const std::size_t expected = sp.kind == StressClass::interior_node   ? 4
                               : sp.kind == StressClass::edge_midpoint ? 2
                                                                       : 1;
  if (sp.elements.size() != expected) throw NotAStressPoint("stress point has the wrong number of elements");
  Vec2 g{0.0, 0.0};
  for (const std::size_t e : sp.elements) {
    const Rect r = uh.mesh().element_rect(e);
    if (!r.contains(sp.at, 1e-12 * std::max(r.width(), r.height())))
      throw NotAStressPoint("stress point does not lie on a listed element");
    const Vec2 ge = uh.gradient_on(e, sp.at);
    g[0] += ge[0];
    g[1] += ge[1];
  }
  const double inv = 1.0 / static_cast<double>(sp.elements.size());
  return {g[0] * inv, g[1] * inv};
}

}  // namespace fvem
