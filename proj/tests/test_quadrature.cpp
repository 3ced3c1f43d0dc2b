#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>
#include <numbers>

#include "fvem/problem.hpp"
#include "fvem/quadrature.hpp"
#include "fvem/verify.hpp"

using namespace fvem;
using namespace fvem::quadrature;

TEST(Segment, Examples) {
  EXPECT_NEAR(integrate_segment([](Point) { return 1.0; }, {0.2, 0.1}, {0.5, 0.5}, 3), 0.5, 1e-15);
  EXPECT_NEAR(integrate_segment([](Point p) { return p.x * p.x; }, {0, 0}, {1, 0}, 2), 1.0 / 3, 1e-16);
  const auto x6 = [](Point p) { return std::pow(p.x, 6); };
  EXPECT_GT(std::abs(integrate_segment(x6, {0, 0}, {1, 0}, 3) - 1.0 / 7), 1e-6);
  EXPECT_NEAR(integrate_segment(x6, {0, 0}, {1, 0}, 6), 1.0 / 7, 1e-15);
}

TEST(Segment, UnsupportedOrders) {
  EXPECT_THROW(gauss_legendre(0), UnsupportedOrder);
  EXPECT_THROW(gauss_legendre(7), UnsupportedOrder);
}

TEST(Segment, RulesAreSymmetricAndNormalized) {
  for (int q = 1; q <= max_order; ++q) {
    const SegmentRule& r = gauss_legendre(q);
    std::vector<std::pair<double, double>> nodes;
    double sum = 0.0;
    for (int i = 0; i < q; ++i) {
      sum += r.weights[i];
      EXPECT_GT(r.weights[i], 0.0);
      nodes.emplace_back(r.points[i], r.weights[i]);
    }
    std::sort(nodes.begin(), nodes.end());
    for (int i = 0; i < q; ++i) {
      EXPECT_EQ(nodes[i].first, -nodes[q - 1 - i].first);
      EXPECT_EQ(nodes[i].second, nodes[q - 1 - i].second);
    }
    EXPECT_NEAR(sum, 2.0, 1e-15);  // weights on [-1, 1]
  }
}

// monomials t^k on a random affine segment, exact for k <= 2q - 1
TEST(Segment, PolynomialExactness) {
  verify::Rng rng(1, "quad_exact");
  for (int trial = 0; trial < 50; ++trial) {
    const Point a{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const Point b{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    for (int q = 1; q <= max_order; ++q) {
      for (int k = 0; k <= 2 * q - 1; ++k) {
        // integrand (1 + s)^k with s the arc length parameter scaled to [0, 1]
        const auto f = [&](Point p) { return std::pow(1.0 + std::hypot(p.x - a.x, p.y - a.y) / len, k); };
        const double exact = len * (std::pow(2.0, k + 1) - 1.0) / (k + 1);
        EXPECT_LE(std::abs(integrate_segment(f, a, b, q) - exact), 1e-13 * exact) << "q=" << q << " k=" << k;
      }
    }
  }
}

TEST(Rect, Examples) {
  const Rect unit{0, 1, 0, 1};
  EXPECT_NEAR(integrate_rect([](Point) { return 1.0; }, unit, 1, 1), 1.0, 1e-16);
  EXPECT_NEAR(integrate_rect([](Point p) { return p.x * p.y; }, unit, 2, 2), 0.25, 1e-16);
  const expr::Expr a11 = benchmark_problem().a11;
  const double exact = (std::exp(2.0) - 1) / 2 + 0.25 + 1;
  // only e^{2x} is not integrated exactly; the 6-point Gauss remainder is
  // (6!)^4 / (13 (12!)^3) * f^(12)(xi) with f^(12) = 4096 e^{2 xi} <= 4096 e^2
  const double remainder = std::pow(720.0, 4) / (13 * std::pow(479001600.0, 3)) * 4096 * std::exp(2.0);
  const double err = integrate_rect([&](Point p) { return a11(p.x, p.y); }, unit, 6, 6) - exact;
  EXPECT_LE(std::abs(err), remainder);
  EXPECT_LE(std::abs(err), 1e-11);
  EXPECT_THROW(integrate_rect([](Point) { return 1.0; }, Rect{0, 0, 0, 1}, 2, 2), std::invalid_argument);
}

TEST(Rect, EqualsIteratedSegmentRuleOnSeparableIntegrands) {
  const Rect r{0.1, 0.7, -0.3, 0.4};
  const auto fx = [](double x) { return std::exp(x) + x * x; };
  const auto fy = [](double y) { return std::cos(3 * y); };
  for (int qx = 1; qx <= max_order; ++qx) {
    for (int qy = 1; qy <= max_order; ++qy) {
      const double ix = integrate_segment([&](Point p) { return fx(p.x); }, {r.x0, 0}, {r.x1, 0}, qx);
      const double iy = integrate_segment([&](Point p) { return fy(p.y); }, {0, r.y0}, {0, r.y1}, qy);
      const double both = integrate_rect([&](Point p) { return fx(p.x) * fy(p.y); }, r, qx, qy);
      EXPECT_NEAR(both, ix * iy, 1e-15 * std::abs(ix * iy) + 1e-16);
    }
  }
}
