#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "stlsynth/graph.hpp"
#include "stlsynth/stl.hpp"

namespace stlsynth {

enum class EvalMode { Volume, AdmissibleVolume };

std::string_view to_string(EvalMode m);
EvalMode parse_eval_mode(std::string_view text);

struct EvaluationConfig {
  EvalMode mode = EvalMode::Volume;
  /// Used by AdmissibleVolume: cell area inside the workspace minus the
  /// area covered by obstacles (assumed pairwise disjoint).
  std::vector<Box> obstacles;
  std::optional<Box> workspace;
  /// Per-label values overriding the geometric evaluation.
  std::map<std::string, double> cell_weights;
};

double evaluate_cell(const CZ& cell, const std::string& label, const EvaluationConfig& cfg);
double evaluate_path(const Path& p, const CellGraph& g, const EvaluationConfig& cfg);

/// Minimum evaluation; ties go to the lexicographically smallest cell
/// sequence. Throws NoPath on an empty list.
const Path& choose_path(const std::vector<Path>& paths, const CellGraph& g,
                        const EvaluationConfig& cfg);

/// Proportional split of `budget` by the evaluations.
std::vector<double> split_time(const std::vector<double>& evaluations, double budget);
/// Budget is a for G targets and b for F targets.
std::vector<double> split_time(const std::vector<double>& evaluations, const stl::Interval& i,
                               stl::Op op);

struct LocalTask {
  int segment = 0;
  int cell_index = 0;
  std::string label;
  CZ cell;
  std::string init_label;
  CZ init_set;
  std::string target_label;
  CZ target_set;
  stl::Interval window;
  /// Last task of a segment; carries the region of interest.
  bool terminal = false;
  stl::Op goal_op = stl::Op::Eventually;
  stl::Interval goal_interval;
  stl::FormulaPtr formula;
};

struct Decomposition {
  Path path;
  /// Accepting targets in visiting order.
  std::vector<stl::Target> targets;
  std::vector<double> evaluations;  // per task
  std::vector<double> durations;    // per task
  std::vector<LocalTask> tasks;
  /// Region names used by the local formulas, in position coordinates.
  std::map<std::string, CZ> regions;
};

/// Sub-goals ordered by deadline (earlier b first), stable.
std::vector<stl::Target> order_targets(std::vector<stl::Target> targets);

/// Position ranges in `path.cells` handled by each accepting segment.
std::vector<std::vector<int>> path_segments(const Path& p);

/// Builds the local tasks for a chosen path. `splits[s]` holds the
/// durations of the tasks of segment s.
std::vector<LocalTask> build_local_tasks(const Path& path, const CellGraph& g,
                                         const std::vector<stl::Target>& targets,
                                         const std::vector<stl::GlobalConstraint>& constraints,
                                         const std::vector<std::vector<double>>& splits,
                                         const std::string& initial_label = "pi0");

/// Evaluation, time split and task construction in one pass.
Decomposition decompose(const Path& path, const CellGraph& g,
                        const std::vector<stl::Target>& targets,
                        const std::vector<stl::GlobalConstraint>& constraints,
                        const EvaluationConfig& cfg, const std::string& initial_label = "pi0");

}  // namespace stlsynth
