#pragma once

#include <limits>
#include <vector>

#include "stlsynth/linalg.hpp"

/// Dense numeric kernels: linear programming, convex quadratic programming,
/// Riccati recursions and the matrix exponential.
namespace stlsynth::optim {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Status { Optimal, Infeasible, Unbounded, MaxIterations };

const char* to_string(Status s);

/// minimize cost'x  s.t.  eq_matrix x = eq_vector,  lower <= x <= upper.
/// Bounds may be +-infinity.
struct LinearProgram {
  VectorXd cost;
  MatrixXd eq_matrix;
  VectorXd eq_vector;
  VectorXd lower;
  VectorXd upper;

  /// Creates a program with `n` free variables, zero cost and no rows.
  static LinearProgram with_variables(int n);
};

struct LpResult {
  Status status = Status::Infeasible;
  VectorXd x;
  double value = 0.0;
  int iterations = 0;
};

/// Two-phase bounded-variable primal simplex on a dense tableau, Bland's
/// rule for both entering and leaving choices. Throws NumericalFailure when
/// the pivot budget is exhausted.
LpResult solve_lp(const LinearProgram& p, int max_pivots = 20000);

/// minimize 0.5 x'Hx + q'x subject to
///   eq_matrix x = eq_vector,
///   ineq_lower <= ineq_matrix x <= ineq_upper,
///   lower <= x <= upper.
/// The general inequality block is optional (zero rows).
struct QuadraticProgram {
  MatrixXd hessian;
  VectorXd linear;
  MatrixXd eq_matrix;
  VectorXd eq_vector;
  MatrixXd ineq_matrix;
  VectorXd ineq_lower;
  VectorXd ineq_upper;
  VectorXd lower;
  VectorXd upper;

  static QuadraticProgram with_variables(int n);
};

struct QpOptions {
  int max_iterations = 50000;
  double tolerance = 1e-6;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
};

struct QpResult {
  Status status = Status::MaxIterations;
  VectorXd x;
  double value = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

/// Operator-splitting (ADMM) solver for convex QPs. The returned x is
/// projected onto the variable bounds, so bounds hold exactly.
QpResult solve_qp(const QuadraticProgram& p, const QpOptions& opts = {});

/// Diagonal LQR weights.
struct LqrWeights {
  VectorXd q;  // diag(Q) >= 0
  VectorXd r;  // diag(R) > 0

  MatrixXd Q() const { return q.asDiagonal(); }
  MatrixXd R() const { return r.asDiagonal(); }
  void validate(int n, int m) const;
};

struct DareResult {
  MatrixXd P;
  MatrixXd K;
  double residual = 0.0;
  int iterations = 0;
};

/// Infinite-horizon discrete Riccati solution with u = -K x.
/// Uses the structure-preserving doubling iteration.
DareResult dare(const MatrixXd& Ad, const MatrixXd& Bd, const LqrWeights& w,
                double tol = 1e-9, int max_iterations = 200);

double dare_residual(const MatrixXd& Ad, const MatrixXd& Bd, const MatrixXd& Q,
                     const MatrixXd& R, const MatrixXd& P);

struct RiccatiSchedule {
  std::vector<MatrixXd> gains;       // K_0 .. K_{steps-1}
  std::vector<MatrixXd> cost_to_go;  // P_0 .. P_steps, P_steps = Q
};

/// Backward recursion from the terminal weight P_N = Q.
RiccatiSchedule finite_horizon_riccati(const MatrixXd& Ad, const MatrixXd& Bd,
                                       const LqrWeights& w, int steps);

/// exp(M) by scaling and squaring with a degree-6 diagonal Pade approximant.
MatrixXd expm(const MatrixXd& M);

double spectral_radius(const MatrixXd& M);

}  // namespace stlsynth::optim
