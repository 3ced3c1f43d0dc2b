/**
 * @file mesh.hpp
 * @brief Tensor-product rectangular meshes, their central dual partition and
 * the stress point set of the bilinear interpolant.
 *
 * Nodes are numbered lexicographically, id = j * (nx + 1) + i, and elements
 * id = j * nx + i. The corners of element (i, j) are listed counterclockwise
 * starting at the lower-left corner:
 *
 *     P4 ---- P3
 *     |        |
 *     P1 ---- P2
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fvem/geometry.hpp"

namespace fvem {

class InvalidMesh : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TensorMesh {
 public:
  TensorMesh(std::vector<double> x_breaks, std::vector<double> y_breaks)
      : x_(std::move(x_breaks)), y_(std::move(y_breaks)) {
    check_breaks(x_, "x");
    check_breaks(y_, "y");
  }

  std::size_t nx() const { return x_.size() - 1; }
  std::size_t ny() const { return y_.size() - 1; }
  std::size_t num_nodes() const { return x_.size() * y_.size(); }
  std::size_t num_elements() const { return nx() * ny(); }

  const std::vector<double>& x_breaks() const { return x_; }
  const std::vector<double>& y_breaks() const { return y_; }

  Rect domain() const { return {x_.front(), x_.back(), y_.front(), y_.back()}; }

  std::size_t node_id(std::size_t i, std::size_t j) const { return j * (nx() + 1) + i; }
  std::size_t element_id(std::size_t i, std::size_t j) const { return j * nx() + i; }

  std::pair<std::size_t, std::size_t> node_ij(std::size_t node) const {
    check_node(node);
    return {node % (nx() + 1), node / (nx() + 1)};
  }
  std::pair<std::size_t, std::size_t> element_ij(std::size_t elem) const {
    check_element(elem);
    return {elem % nx(), elem / nx()};
  }

  Point node_point(std::size_t node) const {
    const auto [i, j] = node_ij(node);
    return {x_[i], y_[j]};
  }

  bool is_boundary(std::size_t node) const {
    const auto [i, j] = node_ij(node);
    return i == 0 || j == 0 || i == nx() || j == ny();
  }

  std::size_t num_interior_nodes() const { return (nx() - 1) * (ny() - 1); }

  Rect element_rect(std::size_t elem) const {
    const auto [i, j] = element_ij(elem);
    return {x_[i], x_[i + 1], y_[j], y_[j + 1]};
  }

  /// Corner node ids of an element in the order P1, P2, P3, P4.
  std::array<std::size_t, 4> element_nodes(std::size_t elem) const {
    const auto [i, j] = element_ij(elem);
    return {node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1), node_id(i, j + 1)};
  }

  /// Element containing p; points on shared edges resolve to the upper/right element.
  std::size_t locate(Point p) const {
    return element_id(locate_interval(x_, p.x), locate_interval(y_, p.y));
  }

  double element_diameter(std::size_t elem) const {
    const Rect r = element_rect(elem);
    return std::hypot(r.width(), r.height());
  }

  /// h = max element diameter.
  double h() const {
    double h = 0.0;
    for (std::size_t e = 0; e < num_elements(); ++e) h = std::max(h, element_diameter(e));
    return h;
  }

  /// gamma = max over K of h_K / rho_K with rho_K = min(h_x, h_y).
  double regularity() const {
    double g = 0.0;
    for (std::size_t e = 0; e < num_elements(); ++e) {
      const Rect r = element_rect(e);
      g = std::max(g, element_diameter(e) / std::min(r.width(), r.height()));
    }
    return g;
  }

  /// max h_K / min h_K.
  double quasi_uniformity() const {
    double lo = element_diameter(0);
    double hi = lo;
    for (std::size_t e = 1; e < num_elements(); ++e) {
      const double d = element_diameter(e);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    return hi / lo;
  }

  void check_node(std::size_t node) const {
    if (node >= num_nodes()) throw std::out_of_range("node id " + std::to_string(node) + " out of range");
  }
  void check_element(std::size_t elem) const {
    if (elem >= num_elements()) throw std::out_of_range("element id " + std::to_string(elem) + " out of range");
  }

 private:
  static void check_breaks(const std::vector<double>& b, const char* axis) {
    if (b.size() < 2) throw InvalidMesh(std::string(axis) + " breaks need at least two values");
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (!std::isfinite(b[k])) throw InvalidMesh(std::string(axis) + " breaks must be finite");
      if (k > 0 && !(b[k] > b[k - 1]))
        throw InvalidMesh(std::string(axis) + " breaks must be strictly increasing (index " + std::to_string(k) + ")");
    }
  }

  static std::size_t locate_interval(const std::vector<double>& b, double t) {
    const auto it = std::upper_bound(b.begin(), b.end(), t);
    const auto k = static_cast<std::ptrdiff_t>(it - b.begin()) - 1;
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(b.size()) - 2));
  }

  std::vector<double> x_;
  std::vector<double> y_;
};

inline TensorMesh build_tensor_mesh(std::vector<double> x_breaks, std::vector<double> y_breaks) {
  return TensorMesh(std::move(x_breaks), std::move(y_breaks));
}

inline std::vector<double> uniform_breaks(double a, double b, std::size_t n) {
  if (n == 0) throw InvalidMesh("uniform_breaks: need at least one interval");
  std::vector<double> v(n + 1);
  for (std::size_t k = 0; k <= n; ++k) v[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n);
  v.back() = b;
  return v;
}

/// n x n uniform mesh of the given rectangle (unit square by default).
inline TensorMesh uniform_mesh(std::size_t n, Rect domain = {0.0, 1.0, 0.0, 1.0}) {
  return TensorMesh(uniform_breaks(domain.x0, domain.x1, n), uniform_breaks(domain.y0, domain.y1, n));
}

namespace detail {
inline std::vector<double> bisect(const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(2 * b.size() - 1);
  for (std::size_t k = 0; k + 1 < b.size(); ++k) {
    out.push_back(b[k]);
    out.push_back(0.5 * (b[k] + b[k + 1]));
  }
  out.push_back(b.back());
  return out;
}
}  // namespace detail

/// Bisects every break interval in both directions.
inline TensorMesh refine_halve(const TensorMesh& mesh) {
  return TensorMesh(detail::bisect(mesh.x_breaks()), detail::bisect(mesh.y_breaks()));
}

// ---------------------------------------------------------------------------
// Dual partition

struct DualCell {
  std::size_t owner = 0;
  Rect bounds;
};

/// Control volume of a node: bounded by the element centers and edge
/// midpoints around it, clipped to the domain at boundary nodes.
inline DualCell dual_cell(const TensorMesh& mesh, std::size_t node) {
  const auto [i, j] = mesh.node_ij(node);
  const auto& x = mesh.x_breaks();
  const auto& y = mesh.y_breaks();
  Rect r;
  r.x0 = i == 0 ? x[0] : 0.5 * (x[i - 1] + x[i]);
  r.x1 = i == mesh.nx() ? x[i] : 0.5 * (x[i] + x[i + 1]);
  r.y0 = j == 0 ? y[0] : 0.5 * (y[j - 1] + y[j]);
  r.y1 = j == mesh.ny() ? y[j] : 0.5 * (y[j] + y[j + 1]);
  return {node, r};
}

/// The quarter of element `elem` that belongs to the control volume of its
/// corner `corner` (0..3 in P1..P4 order).
inline Rect quarter_rect(const TensorMesh& mesh, std::size_t elem, int corner) {
  const Rect r = mesh.element_rect(elem);
  const Point m = r.center();
  switch (corner) {
    case 0: return {r.x0, m.x, r.y0, m.y};
    case 1: return {m.x, r.x1, r.y0, m.y};
    case 2: return {m.x, r.x1, m.y, r.y1};
    case 3: return {r.x0, m.x, m.y, r.y1};
    default: throw std::out_of_range("corner index must be 0..3");
  }
}

/// Node whose control volume contains p (ties resolve upward/rightward).
inline std::size_t locate_dual(const TensorMesh& mesh, Point p) {
  // largest k with t >= midpoint(b[k-1], b[k])
  const auto search = [](const std::vector<double>& b, double t) {
    std::size_t lo = 0, hi = b.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (t >= 0.5 * (b[mid - 1] + b[mid])) lo = mid;
      else hi = mid - 1;
    }
    return lo;
  };
  return mesh.node_id(search(mesh.x_breaks(), p.x), search(mesh.y_breaks(), p.y));
}

// ---------------------------------------------------------------------------
// Stress points

enum class StressClass { interior_node, edge_midpoint, element_midpoint };

inline const char* to_string(StressClass c) {
  switch (c) {
    case StressClass::interior_node: return "node";
    case StressClass::edge_midpoint: return "edge";
    case StressClass::element_midpoint: return "element";
  }
  return "?";
}

struct StressPoint {
  Point at;
  StressClass kind;
  std::vector<std::size_t> elements;
};

/// Interior mesh nodes, midpoints of interior edges, midpoints of elements.
struct StressPointSet {
  std::vector<StressPoint> nodes;
  std::vector<StressPoint> edges;
  std::vector<StressPoint> centers;

  std::size_t size() const { return nodes.size() + edges.size() + centers.size(); }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (const auto& p : nodes) fn(p);
    for (const auto& p : edges) fn(p);
    for (const auto& p : centers) fn(p);
  }
};

inline StressPointSet stress_points(const TensorMesh& mesh) {
  const auto& x = mesh.x_breaks();
  const auto& y = mesh.y_breaks();
  const std::size_t nx = mesh.nx();
  const std::size_t ny = mesh.ny();
  StressPointSet s;
  s.nodes.reserve(mesh.num_interior_nodes());
  s.edges.reserve((nx - 1) * ny + nx * (ny - 1));
  s.centers.reserve(mesh.num_elements());

  for (std::size_t j = 1; j < ny; ++j)
    for (std::size_t i = 1; i < nx; ++i)
      s.nodes.push_back({{x[i], y[j]},
                         StressClass::interior_node,
                         {mesh.element_id(i - 1, j - 1), mesh.element_id(i, j - 1), mesh.element_id(i - 1, j),
                          mesh.element_id(i, j)}});

  // vertical interior edges x = x_i
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 1; i < nx; ++i)
      s.edges.push_back({{x[i], 0.5 * (y[j] + y[j + 1])},
                         StressClass::edge_midpoint,
                         {mesh.element_id(i - 1, j), mesh.element_id(i, j)}});
  // horizontal interior edges y = y_j
  for (std::size_t j = 1; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      s.edges.push_back({{0.5 * (x[i] + x[i + 1]), y[j]},
                         StressClass::edge_midpoint,
                         {mesh.element_id(i, j - 1), mesh.element_id(i, j)}});

  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
    s.centers.push_back({mesh.element_rect(e).center(), StressClass::element_midpoint, {e}});
  return s;
}

}  // namespace fvem
