#include <gtest/gtest.h>

#include <cmath>

#include "fvem/femspace.hpp"
#include "fvem/problem.hpp"
#include "fvem/verify.hpp"

using namespace fvem;

TEST(Shape, CenterAndCorners) {
  const Rect k{0.2, 0.7, 0.1, 0.35};
  const ShapeValues c = shape_eval(k, k.center());
  for (int a = 0; a < 4; ++a) EXPECT_NEAR(c.value[a], 0.25, 1e-16);
  const Point corners[4] = {{k.x0, k.y0}, {k.x1, k.y0}, {k.x1, k.y1}, {k.x0, k.y1}};
  for (int a = 0; a < 4; ++a) {
    const ShapeValues s = shape_eval(k, corners[a]);
    for (int b = 0; b < 4; ++b) EXPECT_NEAR(s.value[b], a == b ? 1.0 : 0.0, 1e-15);
  }
  EXPECT_THROW(shape_eval(k, {0.0, 0.0}), PointOutsideElement);
}

TEST(Shape, PartitionOfUnity) {
  verify::Rng rng(1, "shape");
  for (int t = 0; t < 20; ++t) {
    const Rect k = verify::random_rect(rng);
    for (int i = 0; i < 100; ++i) {
      const ShapeValues s = shape_eval(k, {rng.uniform(k.x0, k.x1), rng.uniform(k.y0, k.y1)});
      double sum = 0.0, gx = 0.0, gy = 0.0;
      for (int a = 0; a < 4; ++a) {
        sum += s.value[a];
        gx += s.grad[a][0];
        gy += s.grad[a][1];
      }
      EXPECT_NEAR(sum, 1.0, 1e-14);
      EXPECT_NEAR(gx, 0.0, 1e-14 / k.width());
      EXPECT_NEAR(gy, 0.0, 1e-14 / k.height());
    }
  }
}

TEST(NodalField, MixedDerivativeOfZeroTwist) {
  const NodalField w = verify::element_field({0, 1, 0, 1}, {0, 1, 1, 0});
  EXPECT_EQ(w.mixed_derivative(0), 0.0);
}

TEST(NodalField, ContinuousAcrossEdges) {
  verify::Rng rng(2, "continuity");
  const MeshPtr m = verify::random_mesh(rng, 2, 5);
  const NodalField w = verify::random_field(rng, m, false);
  for (std::size_t e = 0; e < m->num_elements(); ++e) {
    const auto [i, j] = m->element_ij(e);
    if (i + 1 == m->nx()) continue;
    const Rect k = m->element_rect(e);
    const double y = rng.uniform(k.y0, k.y1);
    EXPECT_NEAR(w.value_on(e, {k.x1, y}), w.value_on(m->element_id(i + 1, j), {k.x1, y}), 1e-15);
  }
}

TEST(Interpolate, BilinearReproduction) {
  verify::Rng rng(3, "interp");
  const MeshPtr m = verify::random_mesh(rng);
  const auto xy = [](double x, double y) { return x * y; };
  const NodalField w = interpolate(xy, m);
  for (std::size_t e = 0; e < m->num_elements(); ++e) {
    const Point c = m->element_rect(e).center();
    EXPECT_NEAR(w.value_on(e, c), c.x * c.y, 1e-15);
  }
  // interpolating a field's own evaluation gives back its coefficients
  const NodalField r = verify::random_field(rng, m, false);
  const NodalField again = interpolate([&](double x, double y) { return r(x, y); }, m);
  for (std::size_t n = 0; n < m->num_nodes(); ++n) EXPECT_NEAR(again[n], r[n], 1e-15);
}

TEST(Interpolate, QuadraticOnSingleElement) {
  const MeshPtr m = share(uniform_mesh(1));
  const NodalField w = interpolate([](double x, double) { return x * x; }, m);
  EXPECT_DOUBLE_EQ(w(0.5, 0.5), 0.5);
}

TEST(PiStar, ZeroesBoundaryAndKeepsInterior) {
  const MeshPtr m = share(uniform_mesh(4));
  std::vector<double> ones(m->num_nodes(), 1.0);
  const DualField d = pi_star(NodalField(m, ones));
  for (std::size_t n = 0; n < m->num_nodes(); ++n) {
    EXPECT_EQ(d[n], m->is_boundary(n) ? 0.0 : 1.0);
    const Point c = dual_cell(*m, n).bounds.center();
    EXPECT_EQ(d(c), d[n]);
  }
}

// element and edge means of v - Pi*v vanish; Pi*v is evaluated through the dual cells
TEST(PiStar, ElementAndEdgeMeans) {
  verify::Rng rng(4, "pi_star_means");
  for (int t = 0; t < 100; ++t) {
    const MeshPtr m = verify::random_mesh(rng, 3, 4);
    const NodalField v = verify::random_field(rng, m, true);
    const DualField pv = pi_star(v);
    const std::size_t e = rng.integer(0, m->num_elements() - 1);
    const Rect k = m->element_rect(e);
    // 2x2 blocks of 4x4 Gauss so no point sits on a dual-cell boundary
    double diff = 0.0, mag = 0.0;
    const Point c = k.center();
    for (const Rect q : {Rect{k.x0, c.x, k.y0, c.y}, Rect{c.x, k.x1, k.y0, c.y}, Rect{c.x, k.x1, c.y, k.y1},
                         Rect{k.x0, c.x, c.y, k.y1}}) {
      quadrature::for_each_rect_point(q, 4, 4, [&](Point p, double w) {
        diff += w * (v.value_on(e, p) - pv(p));
        mag += w * std::abs(v.value_on(e, p));
      });
    }
    EXPECT_LE(std::abs(diff), 1e-13 * (mag + 1e-300));
    const Point p1{k.x0, k.y0}, p2{k.x1, k.y0};
    double edge = 0.0;
    for (const auto& [a, b] : {std::pair{p1, Point{c.x, k.y0}}, std::pair{Point{c.x, k.y0}, p2}})
      edge += quadrature::integrate_segment([&](Point p) { return v.value_on(e, p) - pv(p); }, a, b, 4);
    EXPECT_LE(std::abs(edge), 1e-13 * k.width());
  }
}

TEST(CellAverage, Examples) {
  const MeshPtr m = share(uniform_mesh(3));
  for (const double a : cell_average([](double, double) { return 1.0; }, *m)) EXPECT_DOUBLE_EQ(a, 1.0);
  EXPECT_DOUBLE_EQ(cell_average([](double x, double) { return x; }, uniform_mesh(1))[0], 0.5);
}

TEST(DiscreteH1, Examples) {
  const MeshPtr m = share(uniform_mesh(2));
  EXPECT_EQ(discrete_h1_seminorm(NodalField(m, std::vector<double>(9, 3.0))), 0.0);
  EXPECT_EQ(discrete_h1_element_sq({0, 1, 1, 0}), 2.0);
  const NodalField w = verify::element_field({0, 1, 0, 1}, {0, 1, 1, 0});
  const double true_sq = h1_seminorm_sq(w, 0);
  EXPECT_NEAR(true_sq, 1.0, 1e-15);
  const double gamma = std::sqrt(2.0);
  EXPECT_LE(2.0 / (6 * gamma), true_sq);
  EXPECT_LE(true_sq, gamma * 2.0 / 2);
}

TEST(DiscreteH1, EquivalenceBounds) {
  verify::Rng rng(5, "h1_bounds");
  for (int t = 0; t < 1000; ++t) {
    const Rect k = verify::random_rect(rng);
    const auto w = verify::random_corners(rng);
    const double gamma = std::hypot(k.width(), k.height()) / std::min(k.width(), k.height());
    const double disc = discrete_h1_element_sq(w);
    const double exact = h1_seminorm_sq(verify::element_field(k, w), 0);
    EXPECT_LE(disc / (6 * gamma), exact * (1 + 1e-14));
    EXPECT_LE(exact, gamma / 2 * disc * (1 + 1e-14));
  }
}

TEST(AveragedGradient, Examples) {
  const MeshPtr m = share(uniform_mesh(4));
  const NodalField xy = interpolate([](double x, double y) { return x * y; }, m);
  stress_points(*m).for_each([&](const StressPoint& sp) {
    const Vec2 g = averaged_gradient(xy, sp);
    EXPECT_NEAR(g[0], sp.at.y, 1e-14);
    EXPECT_NEAR(g[1], sp.at.x, 1e-14);
  });

  // |x - 1/2| has a jump in d/dx across x = 1/2; the average of -1 and +1 is 0
  const NodalField kink = interpolate([](double x, double) { return std::abs(x - 0.5); }, m);
  for (const auto& sp : stress_points(*m).edges) {
    if (sp.at.x != 0.5) continue;
    EXPECT_NEAR(averaged_gradient(kink, sp)[0], 0.0, 1e-15);
  }

  verify::Rng rng(6, "avg_grad");
  const NodalField r = verify::random_field(rng, m, false);
  for (const auto& sp : stress_points(*m).centers) {
    const Vec2 g = averaged_gradient(r, sp);
    const Vec2 direct = r.gradient_on(sp.elements[0], sp.at);
    EXPECT_EQ(g[0], direct[0]);
    EXPECT_EQ(g[1], direct[1]);
  }
}

TEST(AveragedGradient, RejectsForeignPoints) {
  const MeshPtr m = share(uniform_mesh(2));
  const NodalField w(m);
  const StressPoint bad{{0.1, 0.1}, StressClass::edge_midpoint, {0}};
  EXPECT_THROW(averaged_gradient(w, bad), NotAStressPoint);
}
