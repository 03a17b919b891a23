#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stlsynth/error.hpp"
#include "stlsynth/optim.hpp"

using namespace stlsynth;
using namespace stlsynth::optim;

TEST_CASE("lp: small problem with a known vertex optimum") {
  // max x + y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6, x, y, s >= 0.
  // Optimum at x = 1.6, y = 1.2.
  auto p = LinearProgram::with_variables(4);
  p.cost << -1, -1, 0, 0;
  p.eq_matrix = (MatrixXd(2, 4) << 1, 2, 1, 0, 3, 1, 0, 1).finished();
  p.eq_vector = (VectorXd(2) << 4, 6).finished();
  p.lower.setZero();
  const auto r = solve_lp(p);
  REQUIRE(r.status == Status::Optimal);
  CHECK(r.x(0) == doctest::Approx(1.6));
  CHECK(r.x(1) == doctest::Approx(1.2));
  CHECK(r.value == doctest::Approx(-2.8));
}

TEST_CASE("lp: infeasible and unbounded programs") {
  auto p = LinearProgram::with_variables(1);
  p.eq_matrix = MatrixXd::Ones(1, 1);
  p.eq_vector = VectorXd::Constant(1, 5.0);
  p.lower(0) = 0;
  p.upper(0) = 1;
  CHECK(solve_lp(p).status == Status::Infeasible);

  auto q = LinearProgram::with_variables(2);
  q.cost << -1, 0;
  q.eq_matrix = (MatrixXd(1, 2) << 1, -1).finished();
  q.eq_vector = VectorXd::Zero(1);
  q.lower.setZero();
  CHECK(solve_lp(q).status == Status::Unbounded);
}

TEST_CASE("qp: projection onto bounds") {
  auto p = QuadraticProgram::with_variables(3);
  p.hessian = 2.0 * MatrixXd::Identity(3, 3);
  const VectorXd x0 = (VectorXd(3) << 0.3, -2.0, 4.0).finished();
  p.linear = -2.0 * x0;
  p.lower = VectorXd::Constant(3, -1.0);
  p.upper = VectorXd::Constant(3, 1.0);
  const auto r = solve_qp(p);
  REQUIRE(r.status == Status::Optimal);
  CHECK(r.x(0) == doctest::Approx(0.3).epsilon(1e-5));
  CHECK(r.x(1) == -1.0);
  CHECK(r.x(2) == 1.0);
}

TEST_CASE("qp: equality constrained least norm") {
  // min |x|^2 s.t. x1 + x2 + x3 = 3 -> x = (1, 1, 1).
  auto p = QuadraticProgram::with_variables(3);
  p.hessian = 2.0 * MatrixXd::Identity(3, 3);
  p.eq_matrix = MatrixXd::Ones(1, 3);
  p.eq_vector = VectorXd::Constant(1, 3.0);
  const auto r = solve_qp(p);
  REQUIRE(r.status == Status::Optimal);
  CHECK((r.x - VectorXd::Ones(3)).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("expm: nilpotent and rotation generators") {
  const MatrixXd n = (MatrixXd(2, 2) << 0, 1, 0, 0).finished();
  CHECK(expm(n).isApprox((MatrixXd(2, 2) << 1, 1, 0, 1).finished(), 1e-14));
  const double th = 0.7;
  const MatrixXd r = (MatrixXd(2, 2) << 0, -th, th, 0).finished();
  const MatrixXd want = (MatrixXd(2, 2) << std::cos(th), -std::sin(th), std::sin(th), std::cos(th)).finished();
  CHECK((expm(r) - want).cwiseAbs().maxCoeff() < 1e-13);
  const MatrixXd big = 40.0 * MatrixXd::Identity(1, 1);
  CHECK(expm(big)(0, 0) == doctest::Approx(std::exp(40.0)).epsilon(1e-12));
}

TEST_CASE("riccati: scalar recursion by hand over three steps") {
  const MatrixXd a = MatrixXd::Constant(1, 1, 1.2);
  const MatrixXd b = MatrixXd::Constant(1, 1, 0.5);
  LqrWeights w{VectorXd::Constant(1, 2.0), VectorXd::Constant(1, 0.3)};
  const auto s = finite_horizon_riccati(a, b, w, 3);
  REQUIRE(s.gains.size() == 3);
  // P3 = q; K = a b P / (r + b^2 P); P = q + a^2 P - (a b P)^2 / (r + b^2 P).
  double P = 2.0;
  double K[3];
  for (int k = 2; k >= 0; --k) {
    K[k] = 1.2 * 0.5 * P / (0.3 + 0.25 * P);
    P = 2.0 + 1.44 * P - std::pow(1.2 * 0.5 * P, 2) / (0.3 + 0.25 * P);
  }
  for (int k = 0; k < 3; ++k) CHECK(s.gains[k](0, 0) == doctest::Approx(K[k]).epsilon(1e-12));
  CHECK(s.cost_to_go[0](0, 0) == doctest::Approx(P).epsilon(1e-12));
}

TEST_CASE("riccati: zero state weight gives zero gains") {
  const MatrixXd a = (MatrixXd(2, 2) << 1, 0.1, 0, 1).finished();
  const MatrixXd b = (MatrixXd(2, 1) << 0, 0.1).finished();
  LqrWeights w{VectorXd::Zero(2), VectorXd::Ones(1)};
  for (const auto& k : finite_horizon_riccati(a, b, w, 10).gains) CHECK(k.norm() == 0.0);
}

TEST_CASE("dare: fixed point of the backward recursion") {
  const MatrixXd a = (MatrixXd(2, 2) << 1, 0.1, 0, 1).finished();
  const MatrixXd b = (MatrixXd(2, 1) << 0.005, 0.1).finished();
  LqrWeights w{VectorXd::Ones(2), VectorXd::Constant(1, 0.1)};
  const auto d = dare(a, b, w);
  CHECK(oracle::riccati_residual(a, b, w.Q(), w.R(), d.P) < 1e-9);
  const auto [k, p] = oracle::riccati_step(a, b, w.Q(), w.R(), d.P);
  CHECK((k - d.K).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(spectral_radius(a - b * d.K) < 1.0);
}

TEST_CASE("lqr weights are validated") {
  LqrWeights w{VectorXd::Ones(2), VectorXd::Zero(1)};
  CHECK_THROWS_AS(w.validate(2, 1), Error);
  LqrWeights ok{VectorXd::Ones(2), VectorXd::Ones(1)};
  CHECK_NOTHROW(ok.validate(2, 1));
}
