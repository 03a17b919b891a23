#include "stlsynth/partition.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>

#include "stlsynth/error.hpp"

namespace stlsynth {

SampleGrid::SampleGrid(const Box& area, double delta) : area_(area) {
  if (area.dim() != 2) throw Error(ErrorKind::UnsupportedDimension, "sampling grid is 2-D");
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid resolution must be > 0");
  const VectorXd w = area.upper - area.lower;
  nx_ = std::max(1, static_cast<int>(std::ceil(w[0] / delta - 1e-9)));
  ny_ = std::max(1, static_cast<int>(std::ceil(w[1] / delta - 1e-9)));
  dx_ = w[0] / nx_;
  dy_ = w[1] / ny_;
}

Point2 SampleGrid::point(int i, int j) const {
  return Point2(area_.lower[0] + i * dx_, area_.lower[1] + j * dy_);
}

std::vector<int> SampleGrid::components(const std::vector<char>& mask, int* count) const {
  std::vector<int> label(mask.size(), -1);
  int next = 0;
  std::deque<int> queue;
  for (int start = 0; start < size(); ++start) {
    if (!mask[start] || label[start] >= 0) continue;
    label[start] = next;
    queue.push_back(start);
    while (!queue.empty()) {
      const int k = queue.front();
      queue.pop_front();
      const int i = k % (nx_ + 1), j = k / (nx_ + 1);
      const int nb[4][2] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[0] > nx_ || q[1] < 0 || q[1] > ny_) continue;
        const int m = index(q[0], q[1]);
        if (mask[m] && label[m] < 0) {
          label[m] = next;
          queue.push_back(m);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

double default_grid_resolution(const Box& workspace) {
  return (workspace.upper - workspace.lower).norm() / 200.0;
}

double PartitionConfig::resolution() const {
  return grid_resolution > 0.0 ? grid_resolution : default_grid_resolution(workspace);
}

std::vector<Point2> resolve_centers(const PartitionConfig& cfg) {
  if (!cfg.centers.empty()) return cfg.centers;
  if (!cfg.random) throw Error(ErrorKind::InvalidArgument, "partition needs centers");
  std::mt19937_64 rng(cfg.random->seed);
  std::uniform_real_distribution<double> ux(cfg.workspace.lower[0], cfg.workspace.upper[0]);
  std::uniform_real_distribution<double> uy(cfg.workspace.lower[1], cfg.workspace.upper[1]);
  std::vector<Point2> pts;
  for (int k = 0; k < cfg.random->count; ++k) {
    const double x = ux(rng);
    pts.emplace_back(x, uy(rng));
  }
  return pts;
}

std::vector<Zonotope> generate_zonotopes(const PartitionConfig& cfg) {
  const std::vector<Point2> centers = resolve_centers(cfg);
  const int n = 2;
  const int count = static_cast<int>(centers.size());
  if (count <= n) {
    throw Error(ErrorKind::InvalidArgument,
                "need more than " + std::to_string(n) + " centers, got " +
                    std::to_string(count));
  }
  for (int i = 0; i < count; ++i) {
    for (int j = i + 1; j < count; ++j) {
      if ((centers[i] - centers[j]).norm() < 1e-12) {
        throw Error(ErrorKind::DegenerateCenters,
                    "centers " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
    }
  }
  const bool explicit_links = !cfg.connections.empty();
  if (explicit_links && static_cast<int>(cfg.connections.size()) != count) {
    throw Error(ErrorKind::DimensionMismatch, "one connection list per center required");
  }
  if (!explicit_links && (cfg.neighbor_count < n || cfg.neighbor_count > count - 1)) {
    throw Error(ErrorKind::InvalidArgument,
                "neighbor count must lie in [" + std::to_string(n) + ", " +
                    std::to_string(count - 1) + "]");
  }

  std::vector<Zonotope> out;
  for (int i = 0; i < count; ++i) {
    std::vector<int> nbrs;
    if (explicit_links) {
      nbrs = cfg.connections[i];
      for (int k : nbrs) {
        if (k < 0 || k >= count || k == i) {
          throw Error(ErrorKind::InvalidArgument,
                      "center " + std::to_string(i) + " has invalid connection " +
                          std::to_string(k));
        }
      }
    } else {
      nbrs.resize(count);
      std::iota(nbrs.begin(), nbrs.end(), 0);
      nbrs.erase(nbrs.begin() + i);
      std::stable_sort(nbrs.begin(), nbrs.end(), [&](int a, int b) {
        return (centers[a] - centers[i]).norm() < (centers[b] - centers[i]).norm();
      });
      nbrs.resize(cfg.neighbor_count);
    }
    MatrixXd G(n, static_cast<int>(nbrs.size()));
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      G.col(static_cast<int>(k)) = 0.5 * (centers[nbrs[k]] - centers[i]);
    }
    Eigen::FullPivLU<MatrixXd> lu(G);
    lu.setThreshold(1e-10);
    if (lu.rank() < n) {
      throw Error(ErrorKind::DegenerateCenters,
                  "generators of center " + std::to_string(i) + " are collinear");
    }
    out.emplace_back(VectorXd(centers[i]), G);
  }
  return out;
}

namespace {

struct Segment {
  Point2 a, b;
};

std::vector<Segment> edges_of(const Polygon& poly) {
  std::vector<Segment> e;
  for (std::size_t i = 0; i < poly.size(); ++i) e.push_back({poly[i], poly[(i + 1) % poly.size()]});
  return e;
}

bool segment_intersection(const Segment& s, const Segment& t, Point2* out) {
  const Point2 r = s.b - s.a, q = t.b - t.a;
  const double den = r.x() * q.y() - r.y() * q.x();
  if (std::abs(den) < 1e-14) return false;
  const Point2 d = t.a - s.a;
  const double u = (d.x() * q.y() - d.y() * q.x()) / den;
  const double v = (d.x() * r.y() - d.y() * r.x()) / den;
  if (u < -1e-12 || u > 1 + 1e-12 || v < -1e-12 || v > 1 + 1e-12) return false;
  *out = s.a + u * r;
  return true;
}

std::vector<char> covered_mask(const SampleGrid& grid, const std::vector<Polygon>& polys) {
  std::vector<char> covered(grid.size(), 0);
  for (int k = 0; k < grid.size(); ++k) {
    const Point2 p = grid.point(k);
    for (const auto& poly : polys) {
      if (convex_contains(poly, p, 1e-9)) {
        covered[k] = 1;
        break;
      }
    }
  }
  return covered;
}

}  // namespace

std::vector<CZ> fill_gaps(const Box& workspace, const std::vector<Zonotope>& zonos,
                          double grid_resolution) {
  if (workspace.dim() != 2) throw Error(ErrorKind::UnsupportedDimension, "fill_gaps is 2-D");
  const SampleGrid grid(workspace, grid_resolution);
  std::vector<Polygon> polys;
  for (const auto& z : zonos) polys.push_back(vertices_2d(CZ(z)));
  const std::vector<char> covered = covered_mask(grid, polys);
  std::vector<char> gap(covered.size());
  for (std::size_t k = 0; k < gap.size(); ++k) gap[k] = !covered[k];
  int count = 0;
  const std::vector<int> comp = grid.components(gap, &count);
  if (count == 0) return {};

  // Boundary vertices: workspace corners, zonotope vertices and all edge
  // crossings, minus those strictly inside some zonotope.
  const Polygon frame = box_polygon(workspace);
  std::vector<Point2> candidates(frame.begin(), frame.end());
  std::vector<Segment> segs = edges_of(frame);
  for (const auto& poly : polys) {
    candidates.insert(candidates.end(), poly.begin(), poly.end());
    const auto e = edges_of(poly);
    segs.insert(segs.end(), e.begin(), e.end());
  }
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      Point2 p;
      if (segment_intersection(segs[i], segs[j], &p)) candidates.push_back(p);
    }
  }
  std::vector<Point2> boundary;
  for (const auto& v : candidates) {
    if (!workspace.contains(VectorXd(v), 1e-9)) continue;
    bool interior = false;
    for (const auto& poly : polys) {
      if (convex_contains(poly, v, -1e-9)) {
        interior = true;
        break;
      }
    }
    if (!interior) boundary.push_back(v);
  }

  const double reach = 1.5 * grid.spacing();
  const double area_tol = 1e-6 * polygon_area(frame) + grid.spacing() * grid.spacing();
  std::vector<CZ> fills;

  // A component whose hull overlaps a zonotope is cut across its longer side,
  // halfway between two grid lines, and each side is handled on its own. The
  // cut line points are shared so neighbouring pieces leave no seam.
  struct Piece {
    std::vector<int> members;
    Box clip;
    int depth;
  };
  constexpr int kMaxDepth = 12;
  std::vector<Piece> todo;
  for (int c = 0; c < count; ++c) {
    Piece pc{{}, workspace, 0};
    for (int k = 0; k < grid.size(); ++k)
      if (comp[k] == c) pc.members.push_back(k);
    todo.push_back(std::move(pc));
  }
  while (!todo.empty()) {
    Piece pc = std::move(todo.back());
    todo.pop_back();
    std::vector<Point2> pts;
    for (const int k : pc.members) pts.push_back(grid.point(k));
    std::vector<Point2> verts;
    for (const auto& v : boundary) {
      if (!pc.clip.contains(VectorXd(v), 1e-9)) continue;
      for (const auto& m : pts) {
        if ((m - v).norm() <= reach) {
          verts.push_back(v);
          break;
        }
      }
    }
    for (const auto& m : pts) {
      for (int axis = 0; axis < 2; ++axis) {
        for (const double edge : {pc.clip.lower[axis], pc.clip.upper[axis]}) {
          const bool cut = edge != workspace.lower[axis] && edge != workspace.upper[axis];
          if (!cut || std::abs(m[axis] - edge) > grid.spacing()) continue;
          Point2 q = m;
          q[axis] = edge;
          verts.push_back(q);
        }
      }
    }
    verts.insert(verts.end(), pts.begin(), pts.end());
    Polygon hull = convex_hull(verts);
    if (hull.size() < 3) {
      // A row or a single sample: thicken it by a quarter cell.
      const double h = 0.25 * grid.spacing();
      std::vector<Point2> fat;
      for (const auto& m : pts)
        for (const double dx : {-h, h})
          for (const double dy : {-h, h}) {
            const Point2 q = m + Point2(dx, dy);
            if (pc.clip.contains(VectorXd(q), 0.0)) fat.push_back(q);
          }
      fat.insert(fat.end(), verts.begin(), verts.end());
      hull = convex_hull(fat);
      if (hull.size() < 3) continue;
    }
    int bad = -1;
    double overlap = 0.0;
    for (std::size_t z = 0; z < polys.size() && bad < 0; ++z) {
      const Polygon o = clip_convex(hull, polys[z]);
      overlap = polygon_area(o);
      if (overlap <= area_tol) continue;
      // Slivers thinner than the grid spacing are sampling error, not a
      // concave gap.
      double perimeter = 0.0;
      for (std::size_t i = 0; i < o.size(); ++i) perimeter += (o[(i + 1) % o.size()] - o[i]).norm();
      if (2.0 * overlap / perimeter > 0.5 * grid.spacing()) bad = static_cast<int>(z);
    }
    // Pieces of a few samples are at grid resolution; their overlap is
    // sampling error as well.
    if (bad < 0 || pc.members.size() < 4) {
      std::vector<VectorXd> hv;
      for (const auto& v : hull) hv.emplace_back(v);
      fills.push_back(from_vertices(hv));
      continue;
    }
    if (pc.depth >= kMaxDepth) {
      const Point2 at = pts.front();
      throw Error(ErrorKind::NonConvexGap,
                  "uncovered region near (" + std::to_string(at.x()) + ", " +
                      std::to_string(at.y()) + ") is not convex: its hull overlaps zonotope " +
                      std::to_string(bad) + " by area " + std::to_string(overlap));
    }
    // Cut through a vertex of the offending zonotope that pokes into the
    // hull; such reflex corners are what makes the gap concave. Otherwise
    // halve the longer side between two grid lines.
    Point2 lo = pts.front(), hi = pts.front();
    for (const auto& m : pts) {
      lo = lo.cwiseMin(m);
      hi = hi.cwiseMax(m);
    }
    int axis = (hi - lo).x() >= (hi - lo).y() ? 0 : 1;
    double line = 0.0;
    bool through_vertex = false;
    for (const auto& v : polys[bad]) {
      if (!convex_contains(hull, v, 1e-9)) continue;
      for (const int ax : {axis, 1 - axis}) {
        if (v[ax] > lo[ax] && v[ax] < hi[ax]) {
          axis = ax;
          line = v[ax];
          through_vertex = true;
          break;
        }
      }
      if (through_vertex) break;
    }
    if (!through_vertex) {
      const double step = axis == 0 ? grid.point(1, 0).x() - grid.point(0, 0).x()
                                    : grid.point(0, 1).y() - grid.point(0, 0).y();
      const double mid = 0.5 * (lo[axis] + hi[axis]);
      line = workspace.lower[axis] + (std::floor((mid - workspace.lower[axis]) / step) + 0.5) * step;
    }
    for (const int side : {0, 1}) {
      std::vector<char> mask(grid.size(), 0);
      for (const int k : pc.members)
        if ((grid.point(k)[axis] < line) == (side == 0)) mask[k] = 1;
      int n = 0;
      const std::vector<int> sub = grid.components(mask, &n);
      Box clip = pc.clip;
      (side == 0 ? clip.upper : clip.lower)[axis] = line;
      for (int c = 0; c < n; ++c) {
        Piece child{{}, clip, pc.depth + 1};
        for (const int k : pc.members)
          if (sub[k] == c) child.members.push_back(k);
        todo.push_back(std::move(child));
      }
    }
  }
  return fills;
}

Partition expand_all(const std::vector<CZ>& cells, double eps, int zonotope_count) {
  Partition p;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    p.cells.push_back(expand(cells[i], eps));
    p.labels.push_back("pi" + std::to_string(i + 1));
  }
  if (zonotope_count < 0) {
    zonotope_count = 0;
    for (const auto& c : cells) zonotope_count += c.is_zonotope() ? 1 : 0;
  }
  p.zonotope_count = zonotope_count;
  p.fill_count = static_cast<int>(cells.size()) - zonotope_count;
  return p;
}

Partition build_partition(const PartitionConfig& cfg) {
  if (!(cfg.eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be > 0");
  const auto zonos = generate_zonotopes(cfg);
  const auto fills = fill_gaps(cfg.workspace, zonos, cfg.resolution());
  std::vector<CZ> cells(zonos.begin(), zonos.end());
  cells.insert(cells.end(), fills.begin(), fills.end());
  return expand_all(cells, cfg.eps, static_cast<int>(zonos.size()));
}

std::vector<Point2> uncovered_points(const Box& workspace, const std::vector<CZ>& cells,
                                     double grid_resolution) {
  const SampleGrid grid(workspace, grid_resolution);
  std::vector<Polygon> polys;
  for (const auto& c : cells) polys.push_back(vertices_2d(c));
  const auto covered = covered_mask(grid, polys);
  std::vector<Point2> out;
  for (int k = 0; k < grid.size(); ++k)
    if (!covered[k]) out.push_back(grid.point(k));
  return out;
}

}  // namespace stlsynth
