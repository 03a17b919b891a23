#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "stlsynth/error.hpp"
#include "stlsynth/geometry.hpp"

using namespace stlsynth;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(v.size());
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Box box2(double x0, double x1, double y0, double y1) { return Box(vec({x0, y0}), vec({x1, y1})); }

// Area of a 2-D zonotope with generators in [-1, 1]: 4 sum_{i<j} |det(g_i, g_j)|.
double zonotope_area(const MatrixXd& g) {
  double a = 0.0;
  for (int i = 0; i < g.cols(); ++i)
    for (int j = i + 1; j < g.cols(); ++j) a += std::abs(g(0, i) * g(1, j) - g(1, i) * g(0, j));
  return 4.0 * a;
}

}  // namespace

TEST_CASE("box converts to a zonotope with the same points") {
  const Box b = box2(-1, 3, 0, 2);
  const Zonotope z = b.to_zonotope();
  CHECK(z.center.isApprox(vec({1, 1})));
  CHECK(contains_point(CZ(z), vec({3, 2})));
  CHECK(contains_point(CZ(z), vec({-1, 0})));
  CHECK_FALSE(contains_point(CZ(z), vec({3.01, 1})));
}

TEST_CASE("contradictory equality constraint makes the set empty") {
  // xi_1 = 2 is outside the unit box.
  const CZ y(vec({0, 0}), MatrixXd::Identity(2, 2), (MatrixXd(1, 2) << 1, 0).finished(), vec({2}));
  CHECK(is_empty(y));
  const CZ ok(vec({0, 0}), MatrixXd::Identity(2, 2), (MatrixXd(1, 2) << 1, 0).finished(), vec({0.5}));
  CHECK_FALSE(is_empty(ok));
  CHECK(contains_point(ok, vec({0.5, -0.9})));
  CHECK_FALSE(contains_point(ok, vec({0.4, 0.0})));
}

TEST_CASE("min coefficient norm of a single constraint") {
  // xi_1 + xi_2 = 1 -> min inf-norm is 0.5.
  const CZ y(vec({0, 0}), MatrixXd::Identity(2, 2), (MatrixXd(1, 2) << 1, 1).finished(), vec({1}));
  CHECK(min_coefficient_norm(y) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("intersection contains exactly the common points") {
  const CZ a(box2(0, 2, 0, 2));
  const CZ b(box2(1, 3, -1, 1));
  const CZ c = intersect(a, b);
  CHECK(contains_point(c, vec({1.5, 0.5})));
  CHECK_FALSE(contains_point(c, vec({0.5, 0.5})));
  CHECK_FALSE(contains_point(c, vec({2.5, 0.5})));
  CHECK(is_empty(intersect(a, CZ(box2(5, 6, 5, 6)))));
  const Box hull = interval_hull(c);
  CHECK(hull.lower.isApprox(vec({1, 0}), 1e-7));
  CHECK(hull.upper.isApprox(vec({2, 1}), 1e-7));
}

TEST_CASE("interval hull and support of a zonotope") {
  const Zonotope z(vec({1, -1}), (MatrixXd(2, 3) << 1, 0.5, -0.2, 0, 1, 0.3).finished());
  const Box h = interval_hull(z);
  CHECK(h.lower.isApprox(vec({1 - 1.7, -1 - 1.3})));
  CHECK(h.upper.isApprox(vec({1 + 1.7, -1 + 1.3})));
  const VectorXd d = vec({0.6, -0.8});
  double want = d.dot(z.center);
  for (int i = 0; i < 3; ++i) want += std::abs(d.dot(z.generators.col(i)));
  CHECK(support(z, d) == doctest::Approx(want));
  CHECK(support(CZ(z), d).value() == doctest::Approx(want).epsilon(1e-7));
}

TEST_CASE("zonotope area matches the determinant formula") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 20; ++t) {
    MatrixXd g(2, 2 + t % 4);
    for (int i = 0; i < g.size(); ++i) g.data()[i] = n01(rng);
    const Zonotope z(vec({n01(rng), n01(rng)}), g);
    CHECK(volume(z) == doctest::Approx(zonotope_area(g)).epsilon(1e-9));
    CHECK(polygon_area(vertices_2d(CZ(z))) == doctest::Approx(zonotope_area(g)).epsilon(1e-6));
  }
}

TEST_CASE("expansion scales generators about the center") {
  const Zonotope z = box2(0, 2, 0, 4).to_zonotope();
  const Zonotope e = expand(z, 0.5);
  CHECK(interval_hull(e).lower.isApprox(vec({-0.5, -1})));
  CHECK(interval_hull(e).upper.isApprox(vec({2.5, 5})));
  CHECK_THROWS_AS(expand(z, 0.0), Error);
}

TEST_CASE("expansion of a constrained zonotope contains the original") {
  // Segment x = 0.5 inside the unit box; its center (0, 0) is not a member.
  const CZ seg((VectorXd(2) << 0, 0).finished(), MatrixXd::Identity(2, 2),
               (MatrixXd(1, 2) << 1, 0).finished(), vec({0.5}));
  const CZ big = expand(seg, 0.05);
  for (double y = -1.0; y <= 1.0; y += 0.1) CHECK(contains_point(big, vec({0.5, y}), 1e-9));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u(-1, 1);
  int checked = 0;
  for (int t = 0; t < 20; ++t) {
    MatrixXd g(2, 4), a(1, 4);
    for (int i = 0; i < g.size(); ++i) g.data()[i] = n01(rng);
    for (int i = 0; i < a.size(); ++i) a.data()[i] = n01(rng);
    VectorXd xi0(4);
    for (int i = 0; i < 4; ++i) xi0(i) = 0.6 * u(rng);
    const CZ y(vec({n01(rng), n01(rng)}), g, a, a * xi0);
    const CZ e = expand(y, 0.05);
    // Members of y: c + G xi with xi feasible, found by projecting random
    // coefficients onto A xi = b and keeping those inside the box.
    const Eigen::RowVectorXd row = a.row(0);
    for (int k = 0; k < 200; ++k) {
      VectorXd xi(4);
      for (int i = 0; i < 4; ++i) xi(i) = u(rng);
      xi -= row.transpose() * ((row.dot(xi) - y.b(0)) / row.squaredNorm());
      if (xi.cwiseAbs().maxCoeff() > 1.0) continue;
      ++checked;
      CHECK(contains_point(e, y.center + g * xi, 1e-9));
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("box vertices and polygon helpers") {
  const Polygon p = vertices_2d(CZ(box2(-1, 1, 0, 3)));
  CHECK(p.size() == 4);
  CHECK(polygon_area(p) == doctest::Approx(6.0));
  CHECK(point_in_polygon(p, Point2(0, 1)));
  CHECK_FALSE(point_in_polygon(p, Point2(2, 1)));
  const Polygon clipped = clip_convex(p, box_polygon(box2(0, 5, 1, 2)));
  CHECK(polygon_area(clipped) == doctest::Approx(1.0));
}

TEST_CASE("vertex enumeration agrees with ray casting away from the boundary") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u(-3, 3);
  int checked = 0;
  for (int t = 0; t < 30; ++t) {
    MatrixXd g(2, 3);
    for (int i = 0; i < g.size(); ++i) g.data()[i] = n01(rng);
    const MatrixXd a = (MatrixXd(1, 3) << n01(rng), n01(rng), n01(rng)).finished();
    const CZ y(vec({0, 0}), g, a, vec({0.2 * n01(rng)}));
    if (oracle::cz_empty(y, 0.0)) continue;
    const Polygon poly = vertices_2d(y);
    if (polygon_area(poly) < 1e-3) continue;
    for (int k = 0; k < 50; ++k) {
      const Point2 p(u(rng), u(rng));
      // Skip points the oracle cannot classify robustly.
      if (oracle::cz_contains(y, p, 1e-4) != oracle::cz_contains(y, p, -1e-4)) continue;
      CHECK(oracle::ray_cast(poly, p) == oracle::cz_contains(y, p, 0.0));
      ++checked;
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("constrained zonotope from vertices") {
  const std::vector<VectorXd> tri = {vec({0, 0}), vec({2, 0}), vec({0, 2})};
  const CZ y = from_vertices(tri);
  CHECK(contains_point(y, vec({0.5, 0.5}), 1e-7));
  CHECK_FALSE(contains_point(y, vec({1.5, 1.5}), 1e-7));
  CHECK(volume(y) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("set containment of zonotopes") {
  const CZ outer(box2(-2, 2, -2, 2));
  CHECK(contains_set(outer, box2(-1, 1, -1, 1).to_zonotope()));
  CHECK_FALSE(contains_set(outer, box2(-1, 3, -1, 1).to_zonotope()));
}

TEST_CASE("linear map and Minkowski sum") {
  const Zonotope a = box2(0, 2, 0, 2).to_zonotope();
  const Zonotope b = box2(-1, 1, -1, 1).to_zonotope();
  const Zonotope s = minkowski_sum(a, b);
  CHECK(interval_hull(s).lower.isApprox(vec({-1, -1})));
  CHECK(interval_hull(s).upper.isApprox(vec({3, 3})));
  const MatrixXd m = (MatrixXd(2, 2) << 2, 0, 0, -1).finished();
  const Zonotope t = linear_map(m, a);
  CHECK(interval_hull(t).lower.isApprox(vec({0, -2})));
  CHECK(interval_hull(t).upper.isApprox(vec({4, 0})));
}

TEST_CASE("dimension mismatch is reported") {
  CHECK_THROWS_AS(contains_point(CZ(box2(0, 1, 0, 1)), vec({0, 0, 0})), Error);
}
