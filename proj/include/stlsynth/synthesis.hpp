#pragma once

#include <vector>

#include "stlsynth/decompose.hpp"
#include "stlsynth/optim.hpp"

namespace stlsynth {

/// x' = A x + B u + C w with box constraints on state and input and a box
/// disturbance set.
struct LinearSystem {
  MatrixXd A;
  MatrixXd B;
  MatrixXd C;
  Box state_set;
  Box input_set;
  Box disturbance_set;

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B.cols()); }
  int nw() const { return static_cast<int>(C.cols()); }
  void validate() const;
};

/// Zero-order-hold model: x+ = Ad x + Bd u + Ed w with u, w held over dt.
struct DiscreteModel {
  MatrixXd Ad;
  MatrixXd Bd;
  MatrixXd Ed;
  double dt = 0.0;
};

DiscreteModel discretize(const LinearSystem& sys, double dt);

/// Stacked prediction x_k = phi[k] x_0 + gamma[k] [u_0; ...; u_{N-1}].
struct LiftedModel {
  std::vector<MatrixXd> phi;
  std::vector<MatrixXd> gamma;
};

LiftedModel lift(const DiscreteModel& m, int steps);

struct GeneratorObjective {
  /// Weight of the intermediate spread relative to the terminal one.
  double path_weight = 0.01;
  double input_weight = 1e-3;
};

/// Inputs steering each initial-set generator towards the origin. Column l
/// of result[k] is the input for generator l at step k. Per step and input
/// component the absolute inputs of all generators sum to at most budget.
std::vector<MatrixXd> generator_inputs(const LiftedModel& lifted, const MatrixXd& generators,
                                       const VectorXd& budget, const GeneratorObjective& obj,
                                       const optim::QpOptions& qp = {});

struct SynthesisOptions {
  int steps_per_task = 20;
  /// Empty means weight 1 on positions, 0 elsewhere, and 0.1 on inputs.
  optim::LqrWeights lqr;
  /// Cells are shrunk by this fraction about their center.
  double shrink = 0.05;
  double input_weight = 0.01;
  /// Weight on the non-position part of the terminal reference state, so
  /// that a task does not hand over a fast-moving state.
  double rest_weight = 0.05;
  /// Share of the input half-width reserved for the generator inputs.
  double generator_budget = 0.5;
  GeneratorObjective generator;
  double safety_margin = 1e-4;
  int convexification_rounds = 4;
  double target_clearance = 0.15;
  optim::QpOptions qp;
};

struct TaskPlan {
  int task = 0;
  double t0 = 0.0;
  double t1 = 0.0;
  double dt = 0.0;
  int steps = 0;
  DiscreteModel model;
  /// Initial box and the state axis of each of its generators.
  Box init_box;
  std::vector<int> init_axes;
  MatrixXd init_generators;
  Point2 target_point = Point2::Zero();
  std::vector<VectorXd> center_inputs;     // steps
  std::vector<MatrixXd> generator_inputs;  // steps, m x p
  std::vector<VectorXd> center_states;     // steps + 1
  std::vector<MatrixXd> generator_states;  // steps + 1, n x p
  std::vector<MatrixXd> gains;             // steps, u = -K e
  std::vector<Zonotope> error_sets;        // steps + 1
  std::vector<Zonotope> tubes;             // steps + 1
  /// Position tube inside the cell, per step.
  std::vector<char> contained;
  /// Fraction of the tube spread by which cell, target and obstacle
  /// constraints were tightened; 1 means the whole tube satisfies them.
  double robustness = 1.0;
  /// Same for the state box.
  double state_robustness = 1.0;

  double time(int k) const { return k == steps ? t1 : t0 + dt * k; }
  /// Generator coefficients of a state in the initial box, clamped to [-1, 1].
  VectorXd coefficients(const VectorXd& x) const;
  VectorXd nominal_state(int k, const VectorXd& xi) const;
  VectorXd control(int k, const VectorXd& x, const VectorXd& xi) const;
  bool all_contained() const;
};

struct SynthesisProblem {
  LinearSystem system;
  Projection position;
  Box initial_set;
  std::vector<LocalTask> tasks;
  std::vector<Box> obstacles;
  Box workspace;
  double grid_resolution = 0.0;
};

struct SynthesisPlan {
  std::vector<TaskPlan> tasks;
  bool all_contained() const;
  double end_time() const;
};

/// Reference points in the target sets, chained backwards from the goal so
/// that each one is the admissible grid point closest to the next.
std::vector<Point2> choose_target_points(const SynthesisProblem& p, double clearance);

/// Error tube E_{k+1} = (Ad - Bd K_k) E_k + Ed W from E_0 = {0}.
std::vector<Zonotope> error_tube(const DiscreteModel& m, const std::vector<MatrixXd>& gains,
                                 const Box& disturbance);

SynthesisPlan synthesize(const SynthesisProblem& p, const SynthesisOptions& opts = {});

}  // namespace stlsynth
