#pragma once

#include <optional>
#include <vector>

#include "stlsynth/linalg.hpp"

namespace stlsynth {

/// {center + G xi : |xi|_inf <= 1}
struct Zonotope {
  VectorXd center;
  MatrixXd generators;

  Zonotope() = default;
  Zonotope(VectorXd c, MatrixXd g);

  int dim() const { return static_cast<int>(center.size()); }
  int num_generators() const { return static_cast<int>(generators.cols()); }

  /// Degenerate zonotope holding a single point.
  static Zonotope point(const VectorXd& p);
};

/// Axis-aligned box.
struct Box {
  VectorXd lower;
  VectorXd upper;

  Box() = default;
  Box(VectorXd lo, VectorXd hi);

  int dim() const { return static_cast<int>(lower.size()); }
  VectorXd center() const { return 0.5 * (lower + upper); }
  VectorXd radius() const { return 0.5 * (upper - lower); }
  bool contains(const VectorXd& p, double tol = 0.0) const;
  Zonotope to_zonotope() const;
};

/// {center + G xi : |xi|_inf <= 1, A xi = b}
struct ConstrainedZonotope {
  VectorXd center;
  MatrixXd generators;
  MatrixXd A;
  VectorXd b;

  ConstrainedZonotope() = default;
  ConstrainedZonotope(VectorXd c, MatrixXd g);
  ConstrainedZonotope(VectorXd c, MatrixXd g, MatrixXd a, VectorXd rhs);
  ConstrainedZonotope(const Zonotope& z);  // NOLINT: implicit by design
  ConstrainedZonotope(const Box& box);     // NOLINT

  int dim() const { return static_cast<int>(center.size()); }
  int num_generators() const { return static_cast<int>(generators.cols()); }
  int num_constraints() const { return static_cast<int>(A.rows()); }
  bool is_zonotope() const { return A.rows() == 0; }

  /// Throws DimensionMismatch / InvalidArgument on inconsistent data.
  void validate() const;
};

using CZ = ConstrainedZonotope;

inline constexpr double kSetTol = 1e-9;

struct EmptinessReport {
  bool empty = false;
  /// A xi = b has no solution at all.
  bool infeasible_constraint = false;
  /// Coefficients of a member point when non-empty.
  VectorXd witness_coefficients;
  VectorXd witness;
};

EmptinessReport check_empty(const CZ& y, double tol = kSetTol);
bool is_empty(const CZ& y, double tol = kSetTol);

/// min |xi|_inf s.t. A xi = b; +inf when the constraints are inconsistent.
double min_coefficient_norm(const CZ& y);

bool contains_point(const CZ& y, const VectorXd& z, double tol = kSetTol);

Zonotope expand(const Zonotope& z, double eps);
CZ expand(const CZ& y, double eps);

CZ intersect(const CZ& y1, const CZ& y2);

Zonotope linear_map(const MatrixXd& m, const Zonotope& z);
CZ linear_map(const MatrixXd& m, const CZ& y);

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b);
CZ minkowski_sum(const CZ& y, const Zonotope& z);

/// Shrinks the set towards its center: {c + s G xi, A xi = b}.
CZ scale_about_center(const CZ& y, double s);

/// max over the set of d'x; nullopt when the set is empty.
std::optional<double> support(const CZ& y, const VectorXd& d);
double support(const Zonotope& z, const VectorXd& d);
/// A point attaining the support value.
std::optional<VectorXd> support_point(const CZ& y, const VectorXd& d);

/// Tight axis-aligned bounds of a bounded non-empty set.
Box interval_hull(const CZ& y);
Box interval_hull(const Zonotope& z);

/// Counterclockwise vertex list of a 2-D set. Throws EmptySet,
/// UnsupportedDimension. Flat sets return their segment endpoints.
Polygon vertices_2d(const CZ& y);

/// Lebesgue volume. Zonotopes in any dimension; constrained sets in 2-D only.
double volume(const Zonotope& z);
double volume(const CZ& y);

/// Sufficient containment test; exact for zonotope inner sets.
bool contains_set(const CZ& outer, const Zonotope& inner, double tol = kSetTol,
                  int max_generators = 20);

// Polygon helpers.
double polygon_area(const Polygon& poly);
Polygon convex_hull(std::vector<Point2> pts);
bool point_in_polygon(const Polygon& poly, const Point2& p);
/// Membership in a convex CCW polygon; tol > 0 grows, tol < 0 shrinks it.
bool convex_contains(const Polygon& ccw, const Point2& p, double tol = 1e-12);
/// Intersection of two convex CCW polygons (Sutherland-Hodgman).
Polygon clip_convex(const Polygon& subject, const Polygon& clip);
Polygon box_polygon(const Box& box);
/// V-representation to constrained zonotope (convex hull of the points).
CZ from_vertices(const std::vector<VectorXd>& vertices);

}  // namespace stlsynth
