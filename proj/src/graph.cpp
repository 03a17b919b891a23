#include "stlsynth/graph.hpp"

#include <functional>
#include <sstream>

#include "stlsynth/error.hpp"

namespace stlsynth {

int CellGraph::index_of(const std::string& label) const {
  for (int i = 0; i < size(); ++i)
    if (labels[i] == label) return i;
  return -1;
}

const CZ& CellGraph::intersection(int i, int j) const {
  const auto it = intersections.find({std::min(i, j), std::max(i, j)});
  if (it == intersections.end()) {
    throw Error(ErrorKind::InvalidArgument,
                "no admissible intersection between " + labels[i] + " and " + labels[j]);
  }
  return it->second;
}

int CellGraph::edge_count() const {
  int e = 0;
  for (int i = 0; i < size(); ++i)
    for (int j = i + 1; j < size(); ++j) e += adjacency[i][j];
  return e;
}

namespace {

bool in_any_obstacle(const Point2& p, const std::vector<Box>& obstacles) {
  for (const auto& o : obstacles)
    if (o.contains(VectorXd(p))) return true;
  return false;
}

// Number of 4-connected components of the admissible sample points of a
// polygon; zero when none.
int admissible_components(const Polygon& poly, const std::vector<Box>& obstacles,
                          const SampleGrid& grid) {
  std::vector<char> mask(grid.size(), 0);
  bool any = false;
  for (int k = 0; k < grid.size(); ++k) {
    const Point2 p = grid.point(k);
    if (convex_contains(poly, p, 1e-12) && !in_any_obstacle(p, obstacles)) {
      mask[k] = 1;
      any = true;
    }
  }
  if (!any) return 0;
  int count = 0;
  grid.components(mask, &count);
  return count;
}

}  // namespace

bool admissible_region(const CZ& region, const std::vector<Box>& obstacles,
                       const Box& workspace, double grid_resolution) {
  if (is_empty(region)) return false;
  const SampleGrid grid(workspace, grid_resolution);
  return admissible_components(vertices_2d(region), obstacles, grid) == 1;
}

CellGraph build_graph(const Partition& p, const std::vector<Box>& obstacles,
                      const std::vector<NamedRegion>& extras, const Box& workspace,
                      double grid_resolution) {
  CellGraph g;
  g.cell_count = static_cast<int>(p.cells.size());
  g.labels = p.labels;
  g.sets = p.cells;
  for (const auto& e : extras) {
    if (e.set.dim() != 2) {
      throw Error(ErrorKind::DimensionMismatch, "region " + e.label + " must be 2-D");
    }
    g.labels.push_back(e.label);
    g.sets.push_back(e.set);
  }
  const int n = g.size();
  g.adjacency.assign(n, std::vector<int>(n, 0));
  g.blocked.assign(n, 0);
  const SampleGrid grid(workspace, grid_resolution);
  std::vector<Polygon> polys;
  for (int i = 0; i < n; ++i) {
    polys.push_back(vertices_2d(g.sets[i]));
    if (i < g.cell_count) g.blocked[i] = admissible_components(polys[i], obstacles, grid) != 1;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (i >= g.cell_count && j >= g.cell_count) continue;
      if (g.blocked[i] || g.blocked[j]) continue;
      CZ omega = intersect(g.sets[i], g.sets[j]);
      if (is_empty(omega)) continue;
      if (admissible_components(vertices_2d(omega), obstacles, grid) != 1) continue;
      g.adjacency[i][j] = g.adjacency[j][i] = 1;
      g.intersections.emplace(std::make_pair(i, j), std::move(omega));
    }
  }
  return g;
}

std::vector<Path> admissible_paths(const CellGraph& g, const std::vector<std::string>& accepting,
                                   int max_paths) {
  std::vector<Path> out;
  if (accepting.empty() || max_paths == 0) return out;
  std::vector<int> targets;
  for (const auto& label : accepting) {
    const int v = g.index_of(label);
    if (v < 0) throw Error(ErrorKind::UnknownRegion, "accepting label " + label + " not in graph");
    targets.push_back(v);
  }

  std::vector<int> walk = {targets[0]};
  std::vector<char> on_segment(g.size(), 0);

  auto emit = [&]() {
    Path p;
    p.vertices = walk;
    std::size_t next_target = 1;
    for (std::size_t k = 0; k < walk.size(); ++k) {
      const int v = walk[k];
      if (g.is_cell(v)) {
        if (p.cells.empty() || p.cells.back() != v) {
          p.cells.push_back(v);
          p.labels.push_back(g.labels[v]);
        }
      }
      if (k > 0 && next_target < targets.size() && v == targets[next_target]) {
        p.goal_positions.push_back(static_cast<int>(p.cells.size()) - 1);
        ++next_target;
      }
    }
    out.push_back(std::move(p));
  };

  std::function<void(std::size_t)> segment;
  std::function<void(int, std::size_t)> dfs = [&](int v, std::size_t seg) {
    if (static_cast<int>(out.size()) >= max_paths) return;
    if (v == targets[seg]) {
      segment(seg);
      return;
    }
    for (int w = 0; w < g.size(); ++w) {
      if (!g.edge(v, w) || on_segment[w]) continue;
      if (!g.is_cell(w) && w != targets[seg]) continue;
      on_segment[w] = 1;
      walk.push_back(w);
      dfs(w, seg);
      walk.pop_back();
      on_segment[w] = 0;
      if (static_cast<int>(out.size()) >= max_paths) return;
    }
  };
  segment = [&](std::size_t reached) {
    if (reached + 1 == targets.size()) {
      emit();
      return;
    }
    const std::vector<char> saved = on_segment;
    std::fill(on_segment.begin(), on_segment.end(), 0);
    on_segment[walk.back()] = 1;
    dfs(walk.back(), reached + 1);
    on_segment = saved;
  };

  on_segment[targets[0]] = 1;
  segment(0);
  return out;
}

std::string export_dot(const CellGraph& g) {
  std::ostringstream os;
  os << "graph cells {\n";
  for (int i = 0; i < g.size(); ++i) {
    os << "  \"" << g.labels[i] << '"';
    if (!g.is_cell(i)) os << " [shape=box]";
    os << ";\n";
  }
  for (int i = 0; i < g.size(); ++i)
    for (int j = i + 1; j < g.size(); ++j)
      if (g.edge(i, j)) os << "  \"" << g.labels[i] << "\" -- \"" << g.labels[j] << "\";\n";
  os << "}\n";
  return os.str();
}

}  // namespace stlsynth
