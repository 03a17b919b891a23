#include <doctest.h>

#include <algorithm>
#include <set>

#include "stlsynth/error.hpp"
#include "stlsynth/graph.hpp"
#include "stlsynth/scenario.hpp"

using namespace stlsynth;

namespace {

Box box2(double x0, double x1, double y0, double y1) {
  return Box((VectorXd(2) << x0, y0).finished(), (VectorXd(2) << x1, y1).finished());
}

Scenario vehicle() { return load_scenario(STLSYNTH_SCENARIO); }

// Three overlapping boxes in a row.
Partition strip() {
  Partition p;
  p.cells = {CZ(box2(0, 2, 0, 1)), CZ(box2(1.5, 3.5, 0, 1)), CZ(box2(3, 5, 0, 1))};
  p.labels = {"pi1", "pi2", "pi3"};
  p.zonotope_count = 3;
  return p;
}

const std::vector<NamedRegion> kStripExtras = {{"pi0", CZ(box2(0.1, 0.5, 0.1, 0.5))},
                                               {"goal", CZ(box2(4.5, 4.9, 0.2, 0.6))}};

}  // namespace

TEST_CASE("sample grid geometry and components") {
  const SampleGrid g(box2(0, 1, 0, 1), 0.25);
  CHECK(g.nx() == 4);
  CHECK(g.size() == 25);
  CHECK(g.point(4, 4).isApprox(Point2(1, 1)));
  // Two separate columns.
  std::vector<char> mask(g.size(), 0);
  for (int j = 0; j <= 4; ++j) {
    mask[g.index(0, j)] = 1;
    mask[g.index(3, j)] = 1;
  }
  int count = 0;
  const auto labels = g.components(mask, &count);
  CHECK(count == 2);
  CHECK(labels[g.index(0, 0)] != labels[g.index(3, 0)]);
  CHECK(labels[g.index(1, 1)] == -1);
}

TEST_CASE("vehicle partition: eight equal cells covering the workspace") {
  const Scenario s = vehicle();
  const Partition p = build_partition(s.partition);
  REQUIRE(p.cells.size() == 8);
  CHECK(p.fill_count == 0);
  for (std::size_t i = 0; i < p.cells.size(); ++i) {
    CHECK(p.labels[i] == "pi" + std::to_string(i + 1));
    CHECK(volume(p.cells[i]) == doctest::Approx(volume(p.cells[0])).epsilon(1e-12));
  }
  CHECK(uncovered_points(s.workspace(), p.cells, s.partition.resolution()).empty());
}

TEST_CASE("random centers are reproducible from the seed") {
  PartitionConfig cfg;
  cfg.workspace = box2(-2, 2, -2, 2);
  cfg.random = RandomCenters{6, 11};
  const auto a = resolve_centers(cfg);
  const auto b = resolve_centers(cfg);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    CHECK(cfg.workspace.contains(a[i]));
  }
  cfg.random->seed = 12;
  CHECK(resolve_centers(cfg)[0] != a[0]);
}

TEST_CASE("partition with gaps is filled to cover the workspace") {
  PartitionConfig cfg;
  cfg.workspace = box2(0, 4, 0, 4);
  cfg.random = RandomCenters{4, 0};
  cfg.eps = 0.05;
  const Partition p = build_partition(cfg);
  CHECK(p.zonotope_count == 4);
  CHECK(p.fill_count > 0);
  CHECK(p.cells.size() == static_cast<std::size_t>(p.zonotope_count + p.fill_count));
  for (int i = p.zonotope_count; i < static_cast<int>(p.cells.size()); ++i)
    CHECK_FALSE(p.cells[i].is_zonotope());
  CHECK(uncovered_points(cfg.workspace, p.cells, cfg.resolution()).empty());
}

TEST_CASE("gap around a central zonotope: concave error or convex pieces") {
  const Box ws = box2(-2, 2, -2, 2);
  const std::vector<Zonotope> one = {box2(-1, 1, -1, 1).to_zonotope()};
  const double res = 0.05;
  try {
    const auto fills = fill_gaps(ws, one, res);
    REQUIRE(fills.size() >= 4);
    std::vector<CZ> all = {CZ(one[0])};
    all.insert(all.end(), fills.begin(), fills.end());
    CHECK(uncovered_points(ws, all, res).empty());
    // No fill reaches into the zonotope beyond the grid resolution.
    const CZ inner(box2(-1 + res, 1 - res, -1 + res, 1 - res));
    for (const auto& f : fills) CHECK(is_empty(intersect(f, inner)));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonConvexGap);
  }
}

TEST_CASE("covered workspace needs no fills") {
  const Box ws = box2(0, 2, 0, 2);
  CHECK(fill_gaps(ws, {box2(-0.1, 2.1, -0.1, 2.1).to_zonotope()}, 0.05).empty());
}

TEST_CASE("vehicle graph is a ring of cells") {
  const Scenario s = vehicle();
  const Partition p = build_partition(s.partition);
  const CellGraph g = build_graph(p, s.obstacles, {}, s.workspace(), s.partition.resolution());
  std::set<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < g.size(); ++i)
    for (int j = i + 1; j < g.size(); ++j)
      if (g.edge(i, j)) edges.insert({g.labels[i], g.labels[j]});
  const std::set<std::pair<std::string, std::string>> ring = {
      {"pi1", "pi2"}, {"pi2", "pi3"}, {"pi3", "pi4"}, {"pi4", "pi5"},
      {"pi5", "pi6"}, {"pi6", "pi7"}, {"pi7", "pi8"}, {"pi1", "pi8"}};
  CHECK(edges == ring);
  CHECK(g.edge_count() == 8);
}

TEST_CASE("paths through a strip of cells") {
  const Partition p = strip();
  const Box ws = box2(0, 5, 0, 1);
  const CellGraph g = build_graph(p, {}, kStripExtras, ws, 0.02);
  CHECK(g.edge(g.index_of("pi1"), g.index_of("pi2")));
  CHECK_FALSE(g.edge(g.index_of("pi1"), g.index_of("pi3")));
  CHECK(g.edge(g.index_of("goal"), g.index_of("pi3")));
  const auto paths = admissible_paths(g, {"pi0", "goal"});
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].labels == std::vector<std::string>{"pi1", "pi2", "pi3"});
  CHECK(g.intersection(g.index_of("pi1"), g.index_of("pi2")).dim() == 2);
}

TEST_CASE("obstacle splitting an overlap removes the edge") {
  const Partition p = strip();
  const std::vector<Box> wall = {box2(1.4, 2.1, 0.45, 0.55)};
  const CellGraph g = build_graph(p, wall, kStripExtras, box2(0, 5, 0, 1), 0.02);
  CHECK_FALSE(g.edge(g.index_of("pi1"), g.index_of("pi2")));
  CHECK(g.edge(g.index_of("pi2"), g.index_of("pi3")));
  CHECK(admissible_paths(g, {"pi0", "goal"}).empty());
}

TEST_CASE("cell cut in two by an obstacle is blocked") {
  const Partition p = strip();
  const std::vector<Box> cut = {box2(2.4, 2.6, -0.1, 1.1)};
  const CellGraph g = build_graph(p, cut, kStripExtras, box2(0, 5, 0, 1), 0.02);
  CHECK(g.blocked[g.index_of("pi2")]);
  CHECK(admissible_paths(g, {"pi0", "goal"}).empty());
  CHECK_FALSE(admissible_region(p.cells[1], cut, box2(0, 5, 0, 1), 0.02));
  CHECK(admissible_region(p.cells[0], cut, box2(0, 5, 0, 1), 0.02));
}

TEST_CASE("accepting sequence of one region") {
  const CellGraph g = build_graph(strip(), {}, kStripExtras, box2(0, 5, 0, 1), 0.02);
  const auto paths = admissible_paths(g, {"pi0"});
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].vertices == std::vector<int>{g.index_of("pi0")});
}

TEST_CASE("dot export lists every node and edge once") {
  const CellGraph g = build_graph(strip(), {}, kStripExtras, box2(0, 5, 0, 1), 0.02);
  const std::string dot = export_dot(g);
  CHECK(dot.rfind("graph", 0) == 0);
  for (const auto& l : g.labels) CHECK(dot.find('"' + l + "\";") != std::string::npos);
  CHECK(static_cast<int>(std::count(dot.begin(), dot.end(), '-')) == 2 * g.edge_count());
}
