#include "stlsynth/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "stlsynth/error.hpp"
#include "stlsynth/optim.hpp"

namespace stlsynth {

using optim::kInf;
using optim::LinearProgram;
using optim::Status;

Zonotope::Zonotope(VectorXd c, MatrixXd g) : center(std::move(c)), generators(std::move(g)) {
  if (generators.rows() != center.size()) {
    if (generators.size() == 0) {
      generators.resize(center.size(), 0);
    } else {
      throw Error(ErrorKind::DimensionMismatch, "zonotope generator rows != dimension");
    }
  }
}

Zonotope Zonotope::point(const VectorXd& p) { return Zonotope(p, MatrixXd::Zero(p.size(), 0)); }

Box::Box(VectorXd lo, VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) {
    throw Error(ErrorKind::DimensionMismatch, "box bounds differ in length");
  }
  if ((lower.array() > upper.array()).any()) {
    throw Error(ErrorKind::InvalidArgument, "box lower bound exceeds upper bound");
  }
}

bool Box::contains(const VectorXd& p, double tol) const {
  if (p.size() != lower.size()) throw Error(ErrorKind::DimensionMismatch, "box membership");
  return (p.array() >= lower.array() - tol).all() && (p.array() <= upper.array() + tol).all();
}

Zonotope Box::to_zonotope() const {
  return Zonotope(center(), MatrixXd(radius().asDiagonal()));
}

CZ::ConstrainedZonotope(VectorXd c, MatrixXd g)
    : ConstrainedZonotope(Zonotope(std::move(c), std::move(g))) {}

CZ::ConstrainedZonotope(VectorXd c, MatrixXd g, MatrixXd a, VectorXd rhs)
    : center(std::move(c)), generators(std::move(g)), A(std::move(a)), b(std::move(rhs)) {
  if (A.size() == 0) A.resize(b.size(), generators.cols());
  validate();
}

CZ::ConstrainedZonotope(const Zonotope& z)
    : center(z.center),
      generators(z.generators),
      A(MatrixXd::Zero(0, z.generators.cols())),
      b(VectorXd::Zero(0)) {}

CZ::ConstrainedZonotope(const Box& box) : ConstrainedZonotope(box.to_zonotope()) {}

void CZ::validate() const {
  if (generators.rows() != center.size() || A.cols() != generators.cols() ||
      A.rows() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "constrained zonotope: c " + std::to_string(center.size()) + ", G " +
                    std::to_string(generators.rows()) + "x" +
                    std::to_string(generators.cols()) + ", A " + std::to_string(A.rows()) +
                    "x" + std::to_string(A.cols()) + ", b " + std::to_string(b.size()));
  }
  if (!center.allFinite() || !generators.allFinite() || !A.allFinite() || !b.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "constrained zonotope has non-finite entries");
  }
}

// ---------------------------------------------------------------------------
// LP-backed predicates
// ---------------------------------------------------------------------------

namespace {

LinearProgram coefficient_lp(const CZ& y, double bound) {
  LinearProgram lp = LinearProgram::with_variables(y.num_generators());
  lp.eq_matrix = y.A;
  lp.eq_vector = y.b;
  lp.lower.setConstant(-bound);
  lp.upper.setConstant(bound);
  return lp;
}

}  // namespace

EmptinessReport check_empty(const CZ& y, double tol) {
  y.validate();
  EmptinessReport rep;
  if (y.is_zonotope()) {
    rep.witness_coefficients = VectorXd::Zero(y.num_generators());
    rep.witness = y.center;
    return rep;
  }
  const auto res = optim::solve_lp(coefficient_lp(y, 1.0 + tol));
  if (res.status == Status::Optimal) {
    rep.witness_coefficients = res.x;
    rep.witness = y.center + y.generators * res.x;
    return rep;
  }
  rep.empty = true;
  const auto free = optim::solve_lp(coefficient_lp(y, kInf));
  rep.infeasible_constraint = free.status == Status::Infeasible;
  return rep;
}

bool is_empty(const CZ& y, double tol) { return check_empty(y, tol).empty; }

double min_coefficient_norm(const CZ& y) {
  y.validate();
  if (y.is_zonotope()) return 0.0;
  const int ng = y.num_generators();
  // Variables (xi, s): minimize s with -s <= xi_i <= s as equality rows
  // xi_i + s - p_i = 0 and s - xi_i - q_i = 0 with p, q >= 0.
  LinearProgram lp = LinearProgram::with_variables(3 * ng + 1);
  const int s = ng;
  lp.cost[s] = 1.0;
  lp.eq_matrix = MatrixXd::Zero(y.num_constraints() + 2 * ng, 3 * ng + 1);
  lp.eq_vector = VectorXd::Zero(y.num_constraints() + 2 * ng);
  lp.eq_matrix.topLeftCorner(y.num_constraints(), ng) = y.A;
  lp.eq_vector.head(y.num_constraints()) = y.b;
  for (int i = 0; i < ng; ++i) {
    const int r1 = y.num_constraints() + 2 * i;
    lp.eq_matrix(r1, i) = 1.0;
    lp.eq_matrix(r1, s) = 1.0;
    lp.eq_matrix(r1, ng + 1 + 2 * i) = -1.0;
    lp.eq_matrix(r1 + 1, i) = -1.0;
    lp.eq_matrix(r1 + 1, s) = 1.0;
    lp.eq_matrix(r1 + 1, ng + 2 + 2 * i) = -1.0;
    lp.lower[ng + 1 + 2 * i] = 0.0;
    lp.lower[ng + 2 + 2 * i] = 0.0;
  }
  lp.lower[s] = 0.0;
  const auto res = optim::solve_lp(lp);
  if (res.status != Status::Optimal) return kInf;
  return res.value;
}

bool contains_point(const CZ& y, const VectorXd& z, double tol) {
  y.validate();
  if (z.size() != y.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "point of length " + std::to_string(z.size()) + " vs set dimension " +
                    std::to_string(y.dim()));
  }
  if (y.is_zonotope() && y.num_generators() == y.dim()) {
    Eigen::FullPivLU<MatrixXd> lu(y.generators);
    if (lu.isInvertible()) {
      const VectorXd xi = lu.solve(z - y.center);
      return xi.lpNorm<Eigen::Infinity>() <= 1.0 + tol;
    }
  }
  LinearProgram lp = LinearProgram::with_variables(y.num_generators());
  lp.eq_matrix.resize(y.dim() + y.num_constraints(), y.num_generators());
  lp.eq_matrix << y.generators, y.A;
  lp.eq_vector.resize(y.dim() + y.num_constraints());
  lp.eq_vector << z - y.center, y.b;
  lp.lower.setConstant(-1.0 - tol);
  lp.upper.setConstant(1.0 + tol);
  return optim::solve_lp(lp).status == Status::Optimal;
}

// ---------------------------------------------------------------------------
// Set operations
// ---------------------------------------------------------------------------

Zonotope expand(const Zonotope& z, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "expansion eps must be > 0");
  return Zonotope(z.center, (1.0 + eps) * z.generators);
}

CZ expand(const CZ& y, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "expansion eps must be > 0");
  if (y.is_zonotope()) return CZ(y.center, (1.0 + eps) * y.generators);
  // Scaling about c only grows the set when c is a member, which need not
  // hold once constraints are present. Scale about the mean of the extreme
  // points along the axes instead; it is a member by convexity.
  VectorXd anchor = VectorXd::Zero(y.dim());
  for (int i = 0; i < y.dim(); ++i) {
    for (const double s : {1.0, -1.0}) {
      const auto p = support_point(y, s * VectorXd::Unit(y.dim(), i));
      if (!p) return y;  // empty stays empty
      anchor += *p;
    }
  }
  anchor /= 2.0 * y.dim();
  return CZ((1.0 + eps) * y.center - eps * anchor, (1.0 + eps) * y.generators, y.A, y.b);
}

CZ intersect(const CZ& y1, const CZ& y2) {
  if (y1.dim() != y2.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "intersect: ambient dimensions differ");
  }
  const int n = y1.dim();
  const int g1 = y1.num_generators(), g2 = y2.num_generators();
  const int c1 = y1.num_constraints(), c2 = y2.num_constraints();
  MatrixXd G = MatrixXd::Zero(n, g1 + g2);
  G.leftCols(g1) = y1.generators;
  MatrixXd A = MatrixXd::Zero(c1 + c2 + n, g1 + g2);
  A.topLeftCorner(c1, g1) = y1.A;
  A.block(c1, g1, c2, g2) = y2.A;
  A.bottomLeftCorner(n, g1) = y1.generators;
  A.bottomRightCorner(n, g2) = -y2.generators;
  VectorXd b(c1 + c2 + n);
  b << y1.b, y2.b, y2.center - y1.center;
  return CZ(y1.center, G, A, b);
}

Zonotope linear_map(const MatrixXd& m, const Zonotope& z) {
  if (m.cols() != z.dim()) throw Error(ErrorKind::DimensionMismatch, "linear_map");
  return Zonotope(m * z.center, m * z.generators);
}

CZ linear_map(const MatrixXd& m, const CZ& y) {
  if (m.cols() != y.dim()) throw Error(ErrorKind::DimensionMismatch, "linear_map");
  return CZ(m * y.center, m * y.generators, y.A, y.b);
}

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "minkowski_sum");
  MatrixXd G(a.dim(), a.num_generators() + b.num_generators());
  G << a.generators, b.generators;
  return Zonotope(a.center + b.center, G);
}

CZ minkowski_sum(const CZ& y, const Zonotope& z) {
  if (y.dim() != z.dim()) throw Error(ErrorKind::DimensionMismatch, "minkowski_sum");
  MatrixXd G(y.dim(), y.num_generators() + z.num_generators());
  G << y.generators, z.generators;
  MatrixXd A = MatrixXd::Zero(y.num_constraints(), G.cols());
  A.leftCols(y.num_generators()) = y.A;
  return CZ(y.center + z.center, G, A, y.b);
}

CZ scale_about_center(const CZ& y, double s) {
  return CZ(y.center, s * y.generators, y.A, y.b);
}

std::optional<VectorXd> support_point(const CZ& y, const VectorXd& d) {
  if (d.size() != y.dim()) throw Error(ErrorKind::DimensionMismatch, "support direction");
  const VectorXd gd = y.generators.transpose() * d;
  if (y.is_zonotope()) {
    VectorXd xi(gd.size());
    for (int i = 0; i < gd.size(); ++i) xi[i] = gd[i] > 0 ? 1.0 : (gd[i] < 0 ? -1.0 : 0.0);
    return VectorXd(y.center + y.generators * xi);
  }
  LinearProgram lp = coefficient_lp(y, 1.0);
  lp.cost = -gd;
  const auto res = optim::solve_lp(lp);
  if (res.status != Status::Optimal) return std::nullopt;
  return VectorXd(y.center + y.generators * res.x);
}

std::optional<double> support(const CZ& y, const VectorXd& d) {
  if (y.is_zonotope()) return d.dot(y.center) + (y.generators.transpose() * d).lpNorm<1>();
  const auto p = support_point(y, d);
  if (!p) return std::nullopt;
  return d.dot(*p);
}

double support(const Zonotope& z, const VectorXd& d) {
  if (d.size() != z.dim()) throw Error(ErrorKind::DimensionMismatch, "support direction");
  return d.dot(z.center) + (z.generators.transpose() * d).lpNorm<1>();
}

Box interval_hull(const Zonotope& z) {
  const VectorXd r = z.generators.cwiseAbs().rowwise().sum();
  return Box(z.center - r, z.center + r);
}

Box interval_hull(const CZ& y) {
  if (y.is_zonotope()) return interval_hull(Zonotope(y.center, y.generators));
  const int n = y.dim();
  VectorXd lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    VectorXd e = VectorXd::Zero(n);
    e[i] = 1.0;
    const auto up = support(y, e);
    const auto dn = support(y, -e);
    if (!up || !dn) throw Error(ErrorKind::EmptySet, "interval hull of an empty set");
    hi[i] = *up;
    lo[i] = std::min(-*dn, *up);
  }
  return Box(lo, hi);
}

// ---------------------------------------------------------------------------
// 2-D vertices and volume
// ---------------------------------------------------------------------------

namespace {

double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

Polygon drop_redundant(const Polygon& in, double tol) {
  Polygon pts;
  for (const auto& p : in) {
    if (pts.empty() || (p - pts.back()).norm() > tol) pts.push_back(p);
  }
  while (pts.size() > 1 && (pts.front() - pts.back()).norm() <= tol) pts.pop_back();
  if (pts.size() < 3) return pts;
  bool changed = true;
  while (changed && pts.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point2& a = pts[(i + pts.size() - 1) % pts.size()];
      const Point2& b = pts[i];
      const Point2& c = pts[(i + 1) % pts.size()];
      const double len = (b - a).norm() * (c - b).norm();
      if (std::abs(cross(b - a, c - b)) <= 1e-10 * std::max(len, 1e-300)) {
        pts.erase(pts.begin() + static_cast<long>(i));
        changed = true;
        break;
      }
    }
  }
  if (pts.size() == 2 && (pts[0] - pts[1]).norm() <= tol) pts.pop_back();
  return pts;
}

}  // namespace

Polygon vertices_2d(const CZ& y) {
  y.validate();
  if (y.dim() != 2) {
    throw Error(ErrorKind::UnsupportedDimension,
                "vertices_2d needs a 2-D set, got dimension " + std::to_string(y.dim()));
  }
  auto sp = [&](const Point2& d) -> Point2 {
    const auto p = support_point(y, VectorXd(d));
    if (!p) throw Error(ErrorKind::EmptySet, "vertices_2d of an empty set");
    return Point2((*p)[0], (*p)[1]);
  };
  const double scale = 1.0 + y.center.cwiseAbs().maxCoeff() +
                       (y.generators.size() ? y.generators.cwiseAbs().maxCoeff() : 0.0);
  const double tol = 1e-9 * scale;

  const std::array<Point2, 4> dirs = {Point2(1, 0), Point2(0, 1), Point2(-1, 0), Point2(0, -1)};
  Polygon seed;
  for (const auto& d : dirs) seed.push_back(sp(d));

  Polygon out;
  std::function<void(const Point2&, const Point2&, int)> refine =
      [&](const Point2& p, const Point2& q, int depth) {
        out.push_back(p);
        const Point2 e = q - p;
        if (e.norm() <= tol || depth > 40) return;
        const Point2 normal = Point2(e.y(), -e.x()).normalized();
        const Point2 r = sp(normal);
        if (normal.dot(r - p) <= tol) return;
        refine(p, r, depth + 1);
        refine(r, q, depth + 1);
      };
  for (std::size_t i = 0; i < seed.size(); ++i) refine(seed[i], seed[(i + 1) % seed.size()], 0);
  return drop_redundant(out, tol);
}

double volume(const Zonotope& z) {
  const int n = z.dim();
  const int ng = z.num_generators();
  if (ng < n) return 0.0;
  double count = 1.0;
  for (int k = 0; k < n; ++k) count = count * (ng - k) / (k + 1);
  if (count > 2e6) {
    throw Error(ErrorKind::ComplexityGuard,
                "zonotope volume needs " + std::to_string(count) + " minors");
  }
  std::vector<int> idx(n);
  for (int k = 0; k < n; ++k) idx[k] = k;
  double total = 0.0;
  MatrixXd sub(n, n);
  while (true) {
    for (int k = 0; k < n; ++k) sub.col(k) = z.generators.col(idx[k]);
    total += std::abs(sub.determinant());
    int k = n - 1;
    while (k >= 0 && idx[k] == ng - n + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
  return std::ldexp(total, n);
}

double volume(const CZ& y) {
  if (y.is_zonotope()) return volume(Zonotope(y.center, y.generators));
  if (y.dim() != 2) {
    throw Error(ErrorKind::UnsupportedDimension,
                "constrained zonotope volume is only available in 2-D");
  }
  if (is_empty(y)) return 0.0;
  const Polygon v = vertices_2d(y);
  return v.size() < 3 ? 0.0 : polygon_area(v);
}

bool contains_set(const CZ& outer, const Zonotope& inner, double tol, int max_generators) {
  if (outer.dim() != inner.dim()) throw Error(ErrorKind::DimensionMismatch, "contains_set");
  if (inner.dim() == 2) {
    for (const auto& v : vertices_2d(CZ(inner))) {
      if (!contains_point(outer, VectorXd(v), tol)) return false;
    }
    return true;
  }
  const int ng = inner.num_generators();
  if (ng > max_generators) {
    throw Error(ErrorKind::ComplexityGuard,
                "contains_set: " + std::to_string(ng) + " generators exceed cap " +
                    std::to_string(max_generators));
  }
  const long long patterns = 1LL << ng;
  VectorXd xi(ng);
  for (long long mask = 0; mask < patterns; ++mask) {
    for (int i = 0; i < ng; ++i) xi[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    if (!contains_point(outer, inner.center + inner.generators * xi, tol)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Polygon helpers
// ---------------------------------------------------------------------------

double polygon_area(const Polygon& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    a += cross(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * std::abs(a);
}

Polygon convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point2& a, const Point2& b) { return (a - b).norm() < 1e-12; }),
            pts.end());
  if (pts.size() < 3) return pts;
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

bool point_in_polygon(const Polygon& poly, const Point2& p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point2& a = poly[i];
    const Point2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
      inside = !inside;
    }
  }
  return inside;
}

bool convex_contains(const Polygon& ccw, const Point2& p, double tol) {
  if (ccw.empty()) return false;
  if (ccw.size() == 1) return (p - ccw[0]).norm() <= std::max(tol, 0.0);
  if (ccw.size() == 2) {
    const Point2 e = ccw[1] - ccw[0];
    const double t = std::clamp((p - ccw[0]).dot(e) / e.squaredNorm(), 0.0, 1.0);
    return (ccw[0] + t * e - p).norm() <= std::max(tol, 0.0);
  }
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Point2& a = ccw[i];
    const Point2 e = ccw[(i + 1) % ccw.size()] - a;
    if (cross(e, p - a) / e.norm() < -tol) return false;
  }
  return true;
}

Polygon clip_convex(const Polygon& subject, const Polygon& clip) {
  if (clip.size() < 3) return {};
  Polygon out = subject;
  for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
    const Point2& a = clip[i];
    const Point2& b = clip[(i + 1) % clip.size()];
    auto side = [&](const Point2& p) { return cross(b - a, p - a); };
    Polygon in = std::move(out);
    out.clear();
    for (std::size_t k = 0; k < in.size(); ++k) {
      const Point2& p = in[k];
      const Point2& q = in[(k + 1) % in.size()];
      const double sp = side(p), sq = side(q);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) out.push_back(p + (q - p) * (sp / (sp - sq)));
    }
  }
  return out;
}

Polygon box_polygon(const Box& box) {
  if (box.dim() != 2) throw Error(ErrorKind::UnsupportedDimension, "box_polygon needs 2-D");
  return {Point2(box.lower[0], box.lower[1]), Point2(box.upper[0], box.lower[1]),
          Point2(box.upper[0], box.upper[1]), Point2(box.lower[0], box.upper[1])};
}

CZ from_vertices(const std::vector<VectorXd>& vertices) {
  if (vertices.empty()) throw Error(ErrorKind::EmptySet, "from_vertices: no points");
  const int n = static_cast<int>(vertices.front().size());
  const int k = static_cast<int>(vertices.size());
  VectorXd c = VectorXd::Zero(n);
  MatrixXd G(n, k);
  for (int i = 0; i < k; ++i) {
    if (vertices[i].size() != n) throw Error(ErrorKind::DimensionMismatch, "from_vertices");
    c += 0.5 * vertices[i];
    G.col(i) = 0.5 * vertices[i];
  }
  return CZ(c, G, MatrixXd::Ones(1, k), VectorXd::Constant(1, 2.0 - k));
}

}  // namespace stlsynth
