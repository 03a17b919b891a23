#include <doctest.h>

#include "stlsynth/error.hpp"
#include "stlsynth/stl.hpp"

using namespace stlsynth;
using namespace stlsynth::stl;

namespace {

Box box2(double x0, double x1, double y0, double y1) {
  return Box((VectorXd(2) << x0, y0).finished(), (VectorXd(2) << x1, y1).finished());
}

RegionTable table() {
  RegionTable t;
  t.regions["A"] = {CZ(box2(0, 1, 0, 1)), {0, 1}};
  t.regions["B"] = {CZ(box2(2, 3, 0, 1)), {0, 1}};
  t.obstacles = {box2(1.2, 1.8, -1, 2)};
  t.obstacle_projection = {0, 1};
  return t;
}

// x moves right at unit speed along y = 0.5, sampled every 0.5 s.
SampledTrajectory walk(double t_end) {
  SampledTrajectory tr;
  for (double t = 0.0; t <= t_end + 1e-12; t += 0.5) {
    tr.times.push_back(t);
    tr.states.push_back((VectorXd(2) << t, 0.5).finished());
  }
  return tr;
}

int count_ops(const FormulaPtr& f, Op op) {
  int n = f->op == op;
  for (const auto& c : f->children) n += count_ops(c, op);
  return n;
}

}  // namespace

TEST_CASE("parse and print round trip") {
  const RegionTable t = table();
  const std::string text =
      "G[0,7.5](in(A) && avoid(obstacles)) && F[0,7.5](norm_inf(x[0,1] - (1.7,-1.7)) <= 0.2)";
  const FormulaPtr f = parse(text, &t);
  CHECK(f->op == Op::And);
  CHECK(f->horizon() == doctest::Approx(7.5));
  const FormulaPtr g = parse(print(f), &t);
  CHECK(equal(f, g));
  CHECK(print(g) == print(f));
}

TEST_CASE("until parses and rewrites at the window midpoint") {
  const RegionTable t = table();
  const FormulaPtr f = parse("(in(A)) U[1,3] (in(B))", &t);
  REQUIRE(f->op == Op::Until);
  const FormulaPtr r = rewrite_until(f);
  CHECK(count_ops(r, Op::Until) == 0);
  REQUIRE(r->op == Op::And);
  CHECK(r->children[0]->op == Op::Always);
  CHECK(r->children[0]->interval == Interval{1, 2});
  CHECK(r->children[1]->op == Op::Eventually);
  CHECK(r->children[1]->interval == Interval{2, 2});
  const FormulaPtr r2 = rewrite_until(f, 2.5);
  CHECK(r2->children[0]->interval == Interval{1, 2.5});
}

TEST_CASE("parser errors") {
  const RegionTable t = table();
  CHECK_THROWS_WITH_AS(parse("G[0,1] in(A", &t), doctest::Contains(""), Error);
  try {
    parse("G[0,1] in(A", &t);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SyntaxError);
  }
  try {
    parse("G[2,1] in(A)", &t);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedInterval);
  }
  try {
    parse("F[0,1] in(Nowhere)", &t);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownRegion);
  }
  try {
    parse("!(G[0,1] in(A))", &t);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedFragment);
  }
}

TEST_CASE("predicates") {
  const RegionTable t = table();
  const VectorXd p = (VectorXd(2) << 0.5, 0.5).finished();
  const VectorXd q = (VectorXd(2) << 1.6, 0.5).finished();
  CHECK(holds(in_region("A"), p, t));
  CHECK_FALSE(holds(in_region("B"), p, t));
  CHECK(holds(avoid(), p, t));
  CHECK_FALSE(holds(avoid(), q, t));
  const auto ball = inf_norm_ball({0, 1}, (VectorXd(2) << 1.0, 0.0).finished(), 0.5);
  CHECK(holds(ball, p, t));
  CHECK_FALSE(holds(ball, q, t));
}

TEST_CASE("monitor verdicts and witnesses") {
  const RegionTable t = table();
  const auto tr = walk(4.0);
  // Reaches B at t = 2.
  const auto reach = monitor(parse("F[0,4] in(B)", &t), tr, t);
  CHECK(reach.satisfied);
  REQUIRE(reach.witness);
  CHECK(*reach.witness == doctest::Approx(2.0));
  // Enters the obstacle at t = 1.5.
  const auto safe = monitor(parse("G[0,4] avoid(obstacles)", &t), tr, t);
  CHECK_FALSE(safe.satisfied);
  REQUIRE(safe.witness);
  CHECK(*safe.witness == doctest::Approx(1.5));
  CHECK(monitor(parse("G[0,1] in(A)", &t), tr, t).satisfied);
  CHECK_FALSE(monitor(parse("G[0,1.5] in(A)", &t), tr, t).satisfied);
  CHECK(monitor(parse("(in(A)) U[0,3] (!in(A))", &t), tr, t).satisfied);
}

TEST_CASE("short trajectories are rejected") {
  const RegionTable t = table();
  try {
    monitor(parse("F[0,10] in(B)", &t), walk(4.0), t);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::HorizonTooShort);
  }
}

TEST_CASE("nested horizons add up") {
  const RegionTable t = table();
  CHECK(parse("G[1,2] F[0,3] in(A)", &t)->horizon() == doctest::Approx(5.0));
  CHECK(parse("(in(A)) U[0,4] (in(B))", &t)->horizon() == doctest::Approx(4.0));
}

TEST_CASE("abstraction splits targets and global constraints") {
  RegionTable t = table();
  const FormulaPtr f = parse(
      "G[0,7.5](in(A) && avoid(obstacles)) && F[0,7.5](norm_inf(x[0,1] - (1.7,-1.7)) <= 0.2) && "
      "G[8,9] in(B)",
      &t);
  const LtlAbstraction a = induced_ltl_targets(f, t);
  REQUIRE(a.targets.size() == 2);
  CHECK(a.targets[0].op == Op::Eventually);
  CHECK(a.targets[0].interval == Interval{0, 7.5});
  CHECK(contains_point(a.targets[0].region, (VectorXd(2) << 1.85, -1.55).finished()));
  CHECK_FALSE(contains_point(a.targets[0].region, (VectorXd(2) << 1.95, -1.7).finished()));
  CHECK(a.targets[1].op == Op::Always);
  CHECK(a.targets[1].name != a.targets[0].name);
  REQUIRE(a.constraints.size() == 1);
  CHECK(a.constraints[0].interval == Interval{0, 7.5});
}
