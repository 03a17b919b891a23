#include <doctest.h>

#include <numeric>

#include "stlsynth/decompose.hpp"
#include "stlsynth/error.hpp"

using namespace stlsynth;

namespace {

Box box2(double x0, double x1, double y0, double y1) {
  return Box((VectorXd(2) << x0, y0).finished(), (VectorXd(2) << x1, y1).finished());
}

// Three overlapping 2x1 boxes, a start box in the first and a goal in the last.
struct Strip {
  Partition partition;
  stl::RegionTable table;
  CellGraph graph;
  stl::LtlAbstraction abstraction;
  std::vector<Path> paths;
};

Strip strip(const std::string& formula) {
  Strip s;
  s.partition.cells = {CZ(box2(0, 2, 0, 1)), CZ(box2(1.5, 3.5, 0, 1)), CZ(box2(3, 5, 0, 1))};
  s.partition.labels = {"pi1", "pi2", "pi3"};
  s.partition.zonotope_count = 3;
  s.table.regions["goal"] = {CZ(box2(4.5, 4.9, 0.2, 0.6)), {0, 1}};
  s.table.regions["late"] = {CZ(box2(3.2, 3.4, 0.2, 0.6)), {0, 1}};
  s.table.obstacle_projection = {0, 1};
  s.abstraction = stl::induced_ltl_targets(stl::parse(formula, &s.table), s.table);
  std::vector<NamedRegion> extras = {{"pi0", CZ(box2(0.1, 0.5, 0.1, 0.5))}};
  std::vector<std::string> accepting = {"pi0"};
  for (const auto& t : s.abstraction.targets) {
    extras.push_back({t.name, t.region});
    accepting.push_back(t.name);
  }
  s.graph = build_graph(s.partition, {}, extras, box2(0, 5, 0, 1), 0.02);
  s.paths = admissible_paths(s.graph, accepting);
  return s;
}

Path fake_path(std::vector<int> cells) {
  Path p;
  p.cells = std::move(cells);
  p.vertices = p.cells;
  return p;
}

}  // namespace

TEST_CASE("time split is proportional to the evaluations") {
  const std::vector<double> e = {1, 2, 1.5, 2, 1};
  const auto d = split_time(e, 7.5);
  REQUIRE(d.size() == 5);
  // total evaluation 7.5 equals the budget, so durations equal evaluations
  for (std::size_t i = 0; i < e.size(); ++i) CHECK(d[i] == doctest::Approx(e[i]));
  const auto h = split_time({1, 3}, 2.0);
  CHECK(h[0] == doctest::Approx(0.5));
  CHECK(h[1] == doctest::Approx(1.5));
  CHECK(std::accumulate(h.begin(), h.end(), 0.0) == doctest::Approx(2.0));
}

TEST_CASE("time budget comes from a for G and b for F") {
  const stl::Interval w{3, 5};
  CHECK(split_time({1, 1}, w, stl::Op::Always)[0] == doctest::Approx(1.5));
  CHECK(split_time({1, 1}, w, stl::Op::Eventually)[0] == doctest::Approx(2.5));
}

TEST_CASE("bad evaluations and empty budgets are rejected") {
  try {
    split_time({1, 0, 2}, 3.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroEvaluation);
  }
  try {
    split_time({1, 2}, 0.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WindowConflict);
  }
}

TEST_CASE("admissible volume removes the workspace outside and the obstacles") {
  EvaluationConfig cfg;
  cfg.mode = EvalMode::AdmissibleVolume;
  cfg.workspace = box2(0, 1.5, 0, 2);
  cfg.obstacles = {box2(1, 3, 1, 3)};
  // [0,1.5]x[0,2] has area 3; the obstacle covers [1,1.5]x[1,2] of it.
  CHECK(evaluate_cell(CZ(box2(0, 2, 0, 2)), "c", cfg) == doctest::Approx(2.5).epsilon(1e-9));
  cfg.mode = EvalMode::Volume;
  CHECK(evaluate_cell(CZ(box2(0, 2, 0, 2)), "c", cfg) == doctest::Approx(4.0).epsilon(1e-9));
  cfg.cell_weights["c"] = 7.0;
  CHECK(evaluate_cell(CZ(box2(0, 2, 0, 2)), "c", cfg) == 7.0);
  CHECK(parse_eval_mode("admissible-volume") == EvalMode::AdmissibleVolume);
  CHECK(to_string(parse_eval_mode("volume")) == "volume");
  CHECK_THROWS_AS(parse_eval_mode("area"), Error);
}

TEST_CASE("path choice: smallest evaluation, ties to the smaller sequence") {
  CellGraph g;
  g.labels = {"a", "b", "c"};
  g.sets = {CZ(box2(0, 1, 0, 1)), CZ(box2(0, 1, 0, 1)), CZ(box2(0, 2, 0, 1))};
  const std::vector<Path> paths = {fake_path({1}), fake_path({0}), fake_path({2})};
  EvaluationConfig cfg;
  CHECK(choose_path(paths, g, cfg).cells == std::vector<int>{0});
  cfg.cell_weights["c"] = 0.5;
  CHECK(choose_path(paths, g, cfg).cells == std::vector<int>{2});
  try {
    choose_path({}, g, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoPath);
  }
}

TEST_CASE("targets are ordered by deadline") {
  stl::Target a, b, c;
  a.name = "a";
  a.interval = {0, 5};
  b.name = "b";
  b.interval = {1, 3};
  c.name = "c";
  c.interval = {0, 5};
  const auto o = order_targets({a, b, c});
  CHECK(o[0].name == "b");
  CHECK(o[1].name == "a");
  CHECK(o[2].name == "c");
}

TEST_CASE("strip decomposition: chained windows and hand-over sets") {
  const Strip s = strip("G[0,6] avoid(obstacles) && F[0,6] in(goal)");
  REQUIRE(s.paths.size() == 1);
  REQUIRE(s.abstraction.targets.size() == 1);
  EvaluationConfig cfg;
  const Decomposition d =
      decompose(s.paths[0], s.graph, s.abstraction.targets, s.abstraction.constraints, cfg);
  REQUIRE(d.tasks.size() == 3);
  // Equal areas give equal thirds of the deadline 6.
  for (int k = 0; k < 3; ++k) {
    CHECK(d.durations[k] == doctest::Approx(2.0));
    CHECK(d.tasks[k].window.a == doctest::Approx(2.0 * k));
    CHECK(d.tasks[k].window.b == doctest::Approx(2.0 * k + 2.0));
    CHECK(d.tasks[k].label == "pi" + std::to_string(k + 1));
  }
  CHECK(d.tasks[0].init_label == "pi1&pi0");
  CHECK(d.tasks[0].target_label == "pi1&pi2");
  CHECK(d.tasks[1].init_label == "pi1&pi2");
  CHECK(d.tasks[1].target_label == "pi2&pi3");
  CHECK_FALSE(d.tasks[1].terminal);
  CHECK(d.tasks[2].terminal);
  CHECK(d.tasks[2].goal_op == stl::Op::Eventually);
  CHECK(d.tasks[2].goal_interval == stl::Interval{4, 6});
  // The hand-over region is the overlap [1.5,2]x[0,1].
  const Box h = interval_hull(d.tasks[0].target_set);
  CHECK(h.lower(0) == doctest::Approx(1.5).epsilon(1e-7));
  CHECK(h.upper(0) == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(contains_point(d.tasks[2].target_set, (VectorXd(2) << 4.7, 0.4).finished(), 1e-9));
  CHECK(d.regions.count("pi2&pi3") == 1);
  // Every local formula carries the global avoid constraint.
  for (const auto& t : d.tasks) CHECK(stl::print(t.formula).find("avoid") != std::string::npos);
}

TEST_CASE("second target starting before the first deadline leaves no time") {
  // Reach goal by 4, then stay in late over [3,5]: the second segment would
  // have to start at 4 and finish by 3.
  const Strip s = strip("F[0,4] in(goal) && G[3,5] in(late)");
  REQUIRE(s.abstraction.targets.size() == 2);
  REQUIRE_FALSE(s.paths.empty());
  try {
    decompose(s.paths[0], s.graph, order_targets(s.abstraction.targets),
              s.abstraction.constraints, {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WindowConflict);
  }
}
