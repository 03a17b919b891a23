#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stlsynth/geometry.hpp"

namespace stlsynth::stl {

struct Interval {
  double a = 0.0;
  double b = 0.0;
  bool operator==(const Interval&) const = default;
};

enum class PredKind { InSet, NotInObstacles, InfNormBall };

struct Predicate {
  PredKind kind = PredKind::InSet;
  /// Region name for InSet, obstacle-group name for NotInObstacles.
  std::string region;
  /// InfNormBall only.
  Projection projection;
  VectorXd point;
  double radius = 0.0;

  bool operator==(const Predicate& o) const;
};

enum class Op { Top, Pred, Not, And, Always, Eventually, Until };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  Op op = Op::Top;
  Predicate pred;
  Interval interval;
  std::vector<FormulaPtr> children;

  /// Latest sample time the formula reads, relative to its start.
  double horizon() const;
  bool is_state_formula() const;
};

bool equal(const FormulaPtr& x, const FormulaPtr& y);

FormulaPtr top();
FormulaPtr pred(Predicate p);
FormulaPtr negate(FormulaPtr child);
FormulaPtr conj(std::vector<FormulaPtr> children);
FormulaPtr always(Interval i, FormulaPtr child);
FormulaPtr eventually(Interval i, FormulaPtr child);
FormulaPtr until(Interval i, FormulaPtr left, FormulaPtr right);

Predicate in_region(const std::string& name);
Predicate avoid(const std::string& group = "obstacles");
Predicate inf_norm_ball(Projection idx, VectorXd center, double radius);

/// Named sets the predicates refer to. Sets live in the coordinates
/// selected by their projection.
struct RegionEntry {
  CZ set;
  Projection projection;
};

struct RegionTable {
  std::map<std::string, RegionEntry> regions;
  std::vector<Box> obstacles;
  Projection obstacle_projection;

  bool has(const std::string& name) const;
  const RegionEntry& at(const std::string& name) const;
};

/// Parses the formula text; with a table, region names are resolved.
FormulaPtr parse(const std::string& text, const RegionTable* regions = nullptr);

std::string print(const FormulaPtr& f);

/// Replaces every Until node l U[a,b] r by G[a,t'] l && F[t',t'] r. Without
/// `t_prime` the window midpoint is used.
FormulaPtr rewrite_until(const FormulaPtr& f, std::optional<double> t_prime = std::nullopt);

struct SampledTrajectory {
  std::vector<double> times;
  std::vector<VectorXd> states;
};

bool holds(const Predicate& p, const VectorXd& x, const RegionTable& regions,
           double tol = 1e-9);

struct MonitorResult {
  bool satisfied = false;
  /// First violating sample for a failed G, first satisfying sample for F.
  std::optional<double> witness;
};

/// Boolean satisfaction at the first sample, over sample instants only.
MonitorResult monitor(const FormulaPtr& f, const SampledTrajectory& tr,
                      const RegionTable& regions);

/// Per-sample truth values of `f` evaluated at every sample.
std::vector<char> evaluate_samples(const FormulaPtr& f, const SampledTrajectory& tr,
                                   const RegionTable& regions);

struct Target {
  std::string name;
  /// Region of interest in projected coordinates.
  CZ region;
  Projection projection;
  Op op = Op::Eventually;
  Interval interval;
  FormulaPtr source;
};

struct GlobalConstraint {
  Interval interval;
  FormulaPtr body;
};

struct LtlAbstraction {
  std::vector<Target> targets;
  std::vector<GlobalConstraint> constraints;
};

/// Splits the (Until-free) conjunction into regions of interest and global
/// stay/avoid constraints.
LtlAbstraction induced_ltl_targets(const FormulaPtr& f, const RegionTable& regions);

}  // namespace stlsynth::stl
