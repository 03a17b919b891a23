#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stlsynth/synthesis.hpp"

namespace stlsynth {

/// One RK4 integration of x' = Ax + Bu + Cw over dt with u, w held.
VectorXd integrate(const LinearSystem& sys, const VectorXd& x, const VectorXd& u,
                   const VectorXd& w, double dt, int substeps);

/// Piecewise-constant disturbance sequences, one value per synthesis step.
/// Realization 0 is the upper corner of the box, 1 the lower corner, the
/// rest are uniform draws.
std::vector<std::vector<VectorXd>> disturbance_realizations(std::uint64_t seed, int count,
                                                            const Box& w, int steps);

struct SimOptions {
  int substeps = 10;
  /// Abort when |x|_inf exceeds this.
  double explosion_bound = 1e6;
};

struct SimResult {
  /// Samples at every synthesis step boundary.
  stl::SampledTrajectory trajectory;
  /// Input applied from the matching sample onwards (one fewer than samples).
  std::vector<VectorXd> inputs;
  /// Some computed input left the input set and was clipped.
  bool saturated = false;
};

SimResult simulate(const LinearSystem& sys, const SynthesisPlan& plan, const VectorXd& x0,
                   const std::vector<VectorXd>& disturbances, const SimOptions& opts = {});

int total_steps(const SynthesisPlan& plan);

struct Scenario {
  std::string name;
  LinearSystem system;
  Projection position;
  PartitionConfig partition;
  std::vector<Box> obstacles;
  /// Initial state set and its position container.
  Box initial_set;
  Box initial_region;
  VectorXd initial_state;
  /// Regions referenced by the formula besides cells and obstacles.
  std::map<std::string, stl::RegionEntry> regions;
  std::string formula;
  /// Split point for Until rewriting; window midpoint when absent.
  std::optional<double> until_split;
  EvalMode eval_mode = EvalMode::AdmissibleVolume;
  std::map<std::string, double> cell_weights;
  SynthesisOptions synthesis;
  std::uint64_t seed = 0;
  int realizations = 11;
  int substeps = 10;
  int max_paths = 64;

  const Box& workspace() const { return partition.workspace; }
  void validate() const;
  stl::RegionTable region_table() const;
};

struct SeedRun {
  int index = 0;
  std::vector<VectorXd> disturbances;
  SimResult sim;
  stl::MonitorResult verdict;
};

struct StageTiming {
  double partition = 0.0;
  double graph = 0.0;
  double decompose = 0.0;
  double synthesis = 0.0;
  double simulation = 0.0;
};

struct RunResult {
  Partition partition;
  CellGraph graph;
  std::vector<Path> paths;
  int chosen_path = -1;
  Decomposition decomposition;
  SynthesisPlan plan;
  std::vector<SeedRun> runs;
  stl::FormulaPtr formula;
  stl::RegionTable regions;
  bool all_satisfied = false;
  StageTiming timing;
};

/// Partition, graph, path choice, decomposition, synthesis, simulation and
/// monitoring. Errors carry the failing stage. `threads` <= 0 means one
/// worker per hardware thread.
RunResult run_pipeline(const Scenario& s, int threads = 1);

}  // namespace stlsynth
