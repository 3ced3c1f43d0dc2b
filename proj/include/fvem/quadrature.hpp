/**
 * @file quadrature.hpp
 * @brief Gauss-Legendre rules on segments and tensor-product rules on
 * axis-aligned rectangles.
 */
#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "fvem/geometry.hpp"

namespace fvem::quadrature {

inline constexpr int max_order = 6;

/// q-point Gauss-Legendre rule on the reference interval [-1, 1].
struct SegmentRule {
  int order = 0;
  std::array<double, max_order> points{};
  std::array<double, max_order> weights{};

  std::span<const double> abscissae() const { return {points.data(), static_cast<std::size_t>(order)}; }
  std::span<const double> coefficients() const { return {weights.data(), static_cast<std::size_t>(order)}; }
};

class UnsupportedOrder : public std::invalid_argument {
 public:
  explicit UnsupportedOrder(int q)
      : std::invalid_argument("unsupported Gauss-Legendre order " + std::to_string(q) + " (expected 1.." +
                              std::to_string(max_order) + ")") {}
};

namespace detail {

// Positive half of each rule; the negative half is mirrored.
inline constexpr std::array<std::array<double, 3>, max_order> half_points{{
    {0.0, 0.0, 0.0},
    {0.57735026918962576451, 0.0, 0.0},
    {0.0, 0.77459666924148337704, 0.0},
    {0.33998104358485626480, 0.86113631159405257522, 0.0},
    {0.0, 0.53846931010568309104, 0.90617984593866399280},
    {0.23861918608319690863, 0.66120938646626451366, 0.93246951420315202781},
}};

inline constexpr std::array<std::array<double, 3>, max_order> half_weights{{
    {2.0, 0.0, 0.0},
    {1.0, 0.0, 0.0},
    {0.88888888888888888889, 0.55555555555555555556, 0.0},
    {0.65214515486254614263, 0.34785484513745385737, 0.0},
    {0.56888888888888888889, 0.47862867049936646804, 0.23692688505618908751},
    {0.46791393457269104739, 0.36076157304813860757, 0.17132449237917034504},
}};

inline SegmentRule make_rule(int q) {
  SegmentRule r;
  r.order = q;
  const auto& p = half_points[q - 1];
  const auto& w = half_weights[q - 1];
  int k = 0;
  if (q % 2 == 1) {
    // odd rules carry the origin in slot 0
    r.points[k] = 0.0;
    r.weights[k] = w[0];
    ++k;
    for (int i = 1; i <= q / 2; ++i) {
      r.points[k] = -p[i];
      r.weights[k++] = w[i];
      r.points[k] = p[i];
      r.weights[k++] = w[i];
    }
  } else {
    for (int i = 0; i < q / 2; ++i) {
      r.points[k] = -p[i];
      r.weights[k++] = w[i];
      r.points[k] = p[i];
      r.weights[k++] = w[i];
    }
  }
  return r;
}

inline const std::array<SegmentRule, max_order>& rule_table() {
  static const std::array<SegmentRule, max_order> table = [] {
    std::array<SegmentRule, max_order> t{};
    for (int q = 1; q <= max_order; ++q) t[q - 1] = make_rule(q);
    return t;
  }();
  return table;
}

}  // namespace detail

inline const SegmentRule& gauss_legendre(int q) {
  if (q < 1 || q > max_order) throw UnsupportedOrder(q);
  return detail::rule_table()[q - 1];
}

/// Tensor product of two segment rules on the reference square [-1, 1]^2.
struct RectRule {
  const SegmentRule* x_rule;
  const SegmentRule* y_rule;

  RectRule(int qx, int qy) : x_rule(&gauss_legendre(qx)), y_rule(&gauss_legendre(qy)) {}

  int size() const { return x_rule->order * y_rule->order; }
};

/// Integral of f over the straight segment [p0, p1] (arc-length measure).
template <class F>
double integrate_segment(F&& f, Point p0, Point p1, int q) {
  const SegmentRule& r = gauss_legendre(q);
  const double dx = p1.x - p0.x;
  const double dy = p1.y - p0.y;
  const double half_len = 0.5 * std::hypot(dx, dy);
  double sum = 0.0;
  for (int i = 0; i < r.order; ++i) {
    const double t = 0.5 * (1.0 + r.points[i]);
    sum += r.weights[i] * f(Point{p0.x + t * dx, p0.y + t * dy});
  }
  return half_len * sum;
}

/// Visit the mapped quadrature points of a rectangle: fn(point, weight).
template <class Fn>
void for_each_rect_point(const Rect& rect, int qx, int qy, Fn&& fn) {
  const SegmentRule& rx = gauss_legendre(qx);
  const SegmentRule& ry = gauss_legendre(qy);
  const double hx = rect.width();
  const double hy = rect.height();
  const double jac = 0.25 * hx * hy;
  for (int j = 0; j < ry.order; ++j) {
    const double y = rect.y0 + 0.5 * hy * (1.0 + ry.points[j]);
    for (int i = 0; i < rx.order; ++i) {
      const double x = rect.x0 + 0.5 * hx * (1.0 + rx.points[i]);
      fn(Point{x, y}, jac * rx.weights[i] * ry.weights[j]);
    }
  }
}

template <class F>
double integrate_rect(F&& f, const Rect& rect, int qx, int qy) {
  if (!(rect.width() > 0.0) || !(rect.height() > 0.0))
    throw std::invalid_argument("integrate_rect: rectangle must have positive area");
  double sum = 0.0;
  for_each_rect_point(rect, qx, qy, [&](Point p, double w) { sum += w * f(p); });
  return sum;
}

}  // namespace fvem::quadrature
