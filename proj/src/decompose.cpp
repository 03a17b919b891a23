#include "stlsynth/decompose.hpp"

#include <algorithm>
#include <numeric>

#include "stlsynth/error.hpp"

namespace stlsynth {

std::string_view to_string(EvalMode m) {
  return m == EvalMode::Volume ? "volume" : "admissible-volume";
}

EvalMode parse_eval_mode(std::string_view text) {
  if (text == "volume") return EvalMode::Volume;
  if (text == "admissible-volume" || text == "admissible") return EvalMode::AdmissibleVolume;
  throw Error(ErrorKind::InvalidArgument, "unknown evaluation mode '" + std::string(text) + "'");
}

double evaluate_cell(const CZ& cell, const std::string& label, const EvaluationConfig& cfg) {
  if (const auto it = cfg.cell_weights.find(label); it != cfg.cell_weights.end()) return it->second;
  if (cfg.mode == EvalMode::Volume) return volume(cell);
  Polygon poly = vertices_2d(cell);
  if (cfg.workspace) poly = clip_convex(poly, box_polygon(*cfg.workspace));
  double area = polygon_area(poly);
  for (const auto& o : cfg.obstacles) area -= polygon_area(clip_convex(poly, box_polygon(o)));
  return area;
}

double evaluate_path(const Path& p, const CellGraph& g, const EvaluationConfig& cfg) {
  double total = 0.0;
  for (const int c : p.cells) total += evaluate_cell(g.sets[c], g.labels[c], cfg);
  return total;
}

const Path& choose_path(const std::vector<Path>& paths, const CellGraph& g,
                        const EvaluationConfig& cfg) {
  if (paths.empty()) throw Error(ErrorKind::NoPath, "no admissible path to the goal regions");
  std::size_t best = 0;
  double best_value = evaluate_path(paths[0], g, cfg);
  for (std::size_t i = 1; i < paths.size(); ++i) {
    const double v = evaluate_path(paths[i], g, cfg);
    // relative tolerance so that float noise in the areas does not decide ties
    const double tol = 1e-9 * std::max(1.0, std::abs(best_value));
    if (v < best_value - tol || (std::abs(v - best_value) <= tol && paths[i].cells < paths[best].cells)) {
      best = i;
      best_value = v;
    }
  }
  return paths[best];
}

std::vector<double> split_time(const std::vector<double>& evaluations, double budget) {
  if (evaluations.empty()) throw Error(ErrorKind::InvalidArgument, "nothing to split");
  if (!(budget > 0.0)) {
    throw Error(ErrorKind::WindowConflict, "no time left for the segment (budget " +
                                               std::to_string(budget) + ")");
  }
  for (const double e : evaluations) {
    if (!(e > 0.0)) throw Error(ErrorKind::ZeroEvaluation, "cell evaluation must be positive");
  }
  const double total = std::accumulate(evaluations.begin(), evaluations.end(), 0.0);
  std::vector<double> out;
  out.reserve(evaluations.size());
  for (const double e : evaluations) out.push_back(e / total * budget);
  return out;
}

std::vector<double> split_time(const std::vector<double>& evaluations, const stl::Interval& i,
                               stl::Op op) {
  return split_time(evaluations, op == stl::Op::Always ? i.a : i.b);
}

std::vector<stl::Target> order_targets(std::vector<stl::Target> targets) {
  std::stable_sort(targets.begin(), targets.end(), [](const stl::Target& x, const stl::Target& y) {
    return x.interval.b < y.interval.b;
  });
  return targets;
}

std::vector<std::vector<int>> path_segments(const Path& p) {
  std::vector<std::vector<int>> out;
  int start = 0;
  for (const int goal : p.goal_positions) {
    std::vector<int> seg;
    for (int k = start; k <= goal; ++k) seg.push_back(k);
    out.push_back(std::move(seg));
    start = goal;
  }
  return out;
}

namespace {

std::string joined(const std::string& a, const std::string& b) { return a + "&" + b; }

// Start of segment s: the end of the previous segment's terminal window.
double segment_start(const std::vector<stl::Target>& targets, std::size_t s) {
  return s == 0 ? 0.0 : targets[s - 1].interval.b;
}

}  // namespace

std::vector<LocalTask> build_local_tasks(const Path& path, const CellGraph& g,
                                         const std::vector<stl::Target>& targets,
                                         const std::vector<stl::GlobalConstraint>& constraints,
                                         const std::vector<std::vector<double>>& splits,
                                         const std::string& initial_label) {
  const auto segments = path_segments(path);
  if (segments.size() != targets.size() || splits.size() != targets.size()) {
    throw Error(ErrorKind::InvalidArgument, "path segments, targets and splits disagree");
  }
  const int origin = g.index_of(initial_label);
  if (origin < 0) throw Error(ErrorKind::UnknownRegion, "unknown initial region " + initial_label);

  std::vector<stl::FormulaPtr> globals;
  for (const auto& c : constraints) globals.push_back(stl::always(c.interval, c.body));

  std::vector<LocalTask> tasks;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    const auto& tgt = targets[s];
    if (splits[s].size() != seg.size()) {
      throw Error(ErrorKind::InvalidArgument, "split size does not match segment length");
    }
    const int goal_vertex = g.index_of(tgt.name);
    if (goal_vertex < 0) throw Error(ErrorKind::UnknownRegion, "target " + tgt.name + " not in graph");
    double t = segment_start(targets, s);
    for (std::size_t k = 0; k < seg.size(); ++k) {
      LocalTask task;
      task.segment = static_cast<int>(s);
      task.cell_index = path.cells[seg[k]];
      task.label = g.labels[task.cell_index];
      task.cell = g.sets[task.cell_index];
      task.terminal = k + 1 == seg.size();

      if (tasks.empty()) {
        task.init_label = joined(task.label, initial_label);
        task.init_set = g.intersection(task.cell_index, origin);
      } else {
        task.init_label = tasks.back().target_label;
        task.init_set = tasks.back().target_set;
      }

      if (task.terminal) {
        task.target_label = joined(task.label, tgt.name);
        task.target_set = g.intersection(task.cell_index, goal_vertex);
        task.window = {t, std::max(tgt.interval.b, t)};
        task.goal_op = tgt.op;
        task.goal_interval = tgt.op == stl::Op::Always
                                 ? tgt.interval
                                 : stl::Interval{std::max(tgt.interval.a, t), tgt.interval.b};
      } else {
        const int next = path.cells[seg[k + 1]];
        task.target_label = joined(task.label, g.labels[next]);
        task.target_set = g.intersection(task.cell_index, next);
        task.window = {t, t + splits[s][k]};
      }
      t = task.window.b;

      std::vector<stl::FormulaPtr> parts = globals;
      parts.push_back(stl::always(task.window, stl::pred(stl::in_region(task.label))));
      if (task.terminal) {
        const auto& body = tgt.source->children.at(0);
        parts.push_back(tgt.op == stl::Op::Always ? stl::always(task.goal_interval, body)
                                                  : stl::eventually(task.goal_interval, body));
      } else {
        parts.push_back(stl::eventually(task.window, stl::pred(stl::in_region(task.target_label))));
      }
      task.formula = stl::conj(std::move(parts));
      tasks.push_back(std::move(task));
    }
  }
  return tasks;
}

Decomposition decompose(const Path& path, const CellGraph& g,
                        const std::vector<stl::Target>& targets,
                        const std::vector<stl::GlobalConstraint>& constraints,
                        const EvaluationConfig& cfg, const std::string& initial_label) {
  Decomposition d;
  d.path = path;
  d.targets = targets;
  const auto segments = path_segments(path);
  if (segments.size() != targets.size()) {
    throw Error(ErrorKind::InvalidArgument, "path does not visit every target");
  }
  std::vector<std::vector<double>> splits;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    std::vector<double> evl;
    for (const int k : segments[s]) {
      const int c = path.cells[k];
      evl.push_back(evaluate_cell(g.sets[c], g.labels[c], cfg));
    }
    const auto& tgt = targets[s];
    const double start = segment_start(targets, s);
    const double horizon = tgt.op == stl::Op::Always ? tgt.interval.a : tgt.interval.b;
    if (!(horizon - start > 0.0)) {
      throw Error(ErrorKind::WindowConflict,
                  "target " + tgt.name + " leaves no time after the previous segment");
    }
    auto split = split_time(evl, horizon - start);
    d.evaluations.insert(d.evaluations.end(), evl.begin(), evl.end());
    splits.push_back(std::move(split));
  }
  d.tasks = build_local_tasks(path, g, targets, constraints, splits, initial_label);
  for (const auto& t : d.tasks) {
    d.durations.push_back(t.window.b - t.window.a);
    d.regions.emplace(t.label, t.cell);
    d.regions.emplace(t.init_label, t.init_set);
    d.regions.emplace(t.target_label, t.target_set);
  }
  return d;
}

}  // namespace stlsynth
