#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "stlsynth/error.hpp"
#include "stlsynth/scenario.hpp"
#include "stlsynth/synthesis.hpp"

using namespace stlsynth;

namespace {

Box box2(double x0, double x1, double y0, double y1) {
  return Box((VectorXd(2) << x0, y0).finished(), (VectorXd(2) << x1, y1).finished());
}

LinearSystem double_integrator() {
  LinearSystem s;
  s.A = (MatrixXd(2, 2) << 0, 1, 0, 0).finished();
  s.B = (MatrixXd(2, 1) << 0, 1).finished();
  s.C = MatrixXd::Identity(2, 2);
  s.state_set = box2(-10, 10, -10, 10);
  s.input_set = Box(VectorXd::Constant(1, -1), VectorXd::Constant(1, 1));
  s.disturbance_set = box2(-0.1, 0.1, -0.05, 0.05);
  return s;
}

DiscreteModel scalar_model(double a, double b, double dt) {
  DiscreteModel m;
  m.Ad = MatrixXd::Constant(1, 1, a);
  m.Bd = MatrixXd::Constant(1, 1, b);
  m.Ed = MatrixXd::Constant(1, 1, 1.0);
  m.dt = dt;
  return m;
}

}  // namespace

TEST_CASE("zero-order hold of the double integrator in closed form") {
  const double dt = 0.3;
  const DiscreteModel m = discretize(double_integrator(), dt);
  CHECK((m.Ad - (MatrixXd(2, 2) << 1, dt, 0, 1).finished()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((m.Bd - (MatrixXd(2, 1) << dt * dt / 2, dt).finished()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((m.Ed - (MatrixXd(2, 2) << dt, dt * dt / 2, 0, dt).finished()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(discretize(double_integrator(), 0.0), Error);
}

TEST_CASE("lifted prediction matches step-by-step iteration") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  DiscreteModel m;
  m.Ad = MatrixXd(3, 3);
  m.Bd = MatrixXd(3, 2);
  for (int i = 0; i < m.Ad.size(); ++i) m.Ad.data()[i] = 0.4 * n01(rng);
  for (int i = 0; i < m.Bd.size(); ++i) m.Bd.data()[i] = n01(rng);
  const int steps = 6;
  const LiftedModel l = lift(m, steps);
  REQUIRE(l.phi.size() == steps + 1);
  VectorXd x0(3), u(2 * steps);
  for (int i = 0; i < 3; ++i) x0(i) = n01(rng);
  for (int i = 0; i < u.size(); ++i) u(i) = n01(rng);
  VectorXd x = x0;
  for (int k = 0; k <= steps; ++k) {
    CHECK((l.phi[k] * x0 + l.gamma[k] * u - x).cwiseAbs().maxCoeff() < 1e-12);
    if (k < steps) x = m.Ad * x + m.Bd * u.segment(2 * k, 2);
  }
}

TEST_CASE("generator inputs solve the ridge problem of a pure integrator") {
  // x+ = x + dt u, terminal cost x_N^2 + lambda |u|^2 only. By symmetry all
  // inputs are equal: u = -dt g / (lambda + N dt^2).
  const double dt = 0.1, lambda = 0.5, g = 2.0;
  const int steps = 10;
  const LiftedModel l = lift(scalar_model(1.0, dt, dt), steps);
  GeneratorObjective obj;
  obj.path_weight = 0.0;
  obj.input_weight = lambda;
  const MatrixXd gens = MatrixXd::Constant(1, 1, g);
  const auto u = generator_inputs(l, gens, VectorXd::Constant(1, 10.0), obj);
  REQUIRE(u.size() == steps);
  const double want = -dt * g / (lambda + steps * dt * dt);
  for (const auto& uk : u) CHECK(uk(0, 0) == doctest::Approx(want).epsilon(1e-3));

  // A binding budget clips every input to it.
  const auto c = generator_inputs(l, gens, VectorXd::Constant(1, 0.1), obj);
  for (const auto& uk : c) CHECK(uk(0, 0) == doctest::Approx(-0.1).epsilon(1e-3));

  CHECK_THROWS_AS(generator_inputs(l, MatrixXd::Ones(2, 1), VectorXd::Ones(1), obj), Error);
}

TEST_CASE("generator budget is shared across generators") {
  const double dt = 0.1;
  const LiftedModel l = lift(scalar_model(1.0, dt, dt), 5);
  GeneratorObjective obj;
  obj.path_weight = 0.0;
  obj.input_weight = 1e-3;
  const MatrixXd gens = (MatrixXd(1, 2) << 3.0, -1.0).finished();
  const auto u = generator_inputs(l, gens, VectorXd::Constant(1, 0.2), obj);
  for (const auto& uk : u) CHECK(uk.cwiseAbs().sum() <= 0.2 + 1e-4);
}

TEST_CASE("error tube without disturbance stays at the origin") {
  const DiscreteModel m = discretize(double_integrator(), 0.2);
  const std::vector<MatrixXd> k(5, (MatrixXd(1, 2) << 1.0, 1.5).finished());
  const auto e = error_tube(m, k, box2(0, 0, 0, 0));
  REQUIRE(e.size() == 6);
  for (const auto& z : e) {
    CHECK(z.center.norm() == 0.0);
    CHECK((z.generators.cols() == 0 || z.generators.norm() == 0.0));
  }
}

TEST_CASE("scalar error tube radius is a geometric sum") {
  // e+ = (a - b k) e + w, |w| <= r: radius_k = r sum_{j<k} |a - b k|^j.
  const double a = 1.1, b = 0.5, gain = 0.8, r = 0.3;
  const auto e = error_tube(scalar_model(a, b, 0.1), std::vector<MatrixXd>(4, MatrixXd::Constant(1, 1, gain)),
                            Box(VectorXd::Constant(1, -r), VectorXd::Constant(1, r)));
  double want = 0.0, pw = 1.0;
  for (int k = 1; k < 5; ++k) {
    want += r * pw;
    pw *= std::abs(a - b * gain);
    CHECK(interval_hull(e[k]).radius()(0) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("error tube contains sampled disturbance responses") {
  const LinearSystem sys = double_integrator();
  const DiscreteModel m = discretize(sys, 0.2);
  const std::vector<MatrixXd> k(8, (MatrixXd(1, 2) << 1.0, 1.5).finished());
  const auto tube = error_tube(m, k, sys.disturbance_set);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    VectorXd e = VectorXd::Zero(2);
    for (int s = 0; s < 8; ++s) {
      VectorXd w = sys.disturbance_set.center();
      for (int i = 0; i < 2; ++i) w(i) += u(rng) * sys.disturbance_set.radius()(i);
      e = (m.Ad - m.Bd * k[s]) * e + m.Ed * w;
      CHECK(oracle::cz_contains(CZ(tube[s + 1]), e, 1e-9));
    }
  }
}

TEST_CASE("vehicle plan: undisturbed steps follow the nominal superposition") {
  const Scenario s = load_scenario(STLSYNTH_SCENARIO);
  const RunResult r = run_pipeline(s, 1);
  REQUIRE(!r.plan.tasks.empty());
  CHECK(r.plan.end_time() == doctest::Approx(7.5));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& task : r.plan.tasks) {
    VectorXd xi(task.init_generators.cols());
    for (int i = 0; i < xi.size(); ++i) xi(i) = u(rng);
    VectorXd x = task.nominal_state(0, xi);
    for (int k = 0; k < task.steps; ++k) {
      // With w = 0 the error never leaves the origin.
      CHECK((x - task.nominal_state(k, xi)).cwiseAbs().maxCoeff() < 1e-9);
      x = task.model.Ad * x + task.model.Bd * task.control(k, x, xi);
    }
  }
}
