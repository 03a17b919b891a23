#include "stlsynth/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include "stlsynth/error.hpp"

namespace stlsynth {

VectorXd integrate(const LinearSystem& sys, const VectorXd& x, const VectorXd& u,
                   const VectorXd& w, double dt, int substeps) {
  if (substeps < 1) throw Error(ErrorKind::InvalidArgument, "substeps must be positive");
  const VectorXd drive = sys.B * u + sys.C * w;
  auto f = [&](const VectorXd& s) -> VectorXd { return sys.A * s + drive; };
  const double h = dt / substeps;
  VectorXd s = x;
  for (int i = 0; i < substeps; ++i) {
    const VectorXd k1 = f(s);
    const VectorXd k2 = f(s + 0.5 * h * k1);
    const VectorXd k3 = f(s + 0.5 * h * k2);
    const VectorXd k4 = f(s + h * k3);
    s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return s;
}

std::vector<std::vector<VectorXd>> disturbance_realizations(std::uint64_t seed, int count,
                                                            const Box& w, int steps) {
  if (count < 0 || steps < 0) throw Error(ErrorKind::InvalidArgument, "negative realization size");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<VectorXd>> out;
  for (int r = 0; r < count; ++r) {
    std::vector<VectorXd> seq;
    seq.reserve(steps);
    for (int k = 0; k < steps; ++k) {
      if (r == 0) {
        seq.push_back(w.upper);
      } else if (r == 1) {
        seq.push_back(w.lower);
      } else {
        VectorXd v(w.dim());
        for (int i = 0; i < w.dim(); ++i) v(i) = w.lower(i) + unit(rng) * (w.upper(i) - w.lower(i));
        seq.push_back(std::move(v));
      }
    }
    out.push_back(std::move(seq));
  }
  return out;
}

int total_steps(const SynthesisPlan& plan) {
  int n = 0;
  for (const auto& t : plan.tasks) n += t.steps;
  return n;
}

SimResult simulate(const LinearSystem& sys, const SynthesisPlan& plan, const VectorXd& x0,
                   const std::vector<VectorXd>& disturbances, const SimOptions& opts) {
  if (x0.size() != sys.nx()) throw Error(ErrorKind::DimensionMismatch, "initial state size");
  if (static_cast<int>(disturbances.size()) < total_steps(plan)) {
    throw Error(ErrorKind::InvalidArgument, "disturbance sequence shorter than the plan");
  }
  SimResult out;
  VectorXd x = x0;
  out.trajectory.times.push_back(plan.tasks.empty() ? 0.0 : plan.tasks.front().t0);
  out.trajectory.states.push_back(x);
  int step = 0;
  for (const auto& task : plan.tasks) {
    const VectorXd xi = task.coefficients(x);
    for (int k = 0; k < task.steps; ++k, ++step) {
      VectorXd u = task.control(k, x, xi);
      const VectorXd clipped =
          u.cwiseMax(sys.input_set.lower).cwiseMin(sys.input_set.upper);
      if ((clipped - u).cwiseAbs().maxCoeff() > 1e-9) out.saturated = true;
      u = clipped;
      x = integrate(sys, x, u, disturbances[step], task.dt, opts.substeps);
      if (!x.allFinite() || x.cwiseAbs().maxCoeff() > opts.explosion_bound) {
        throw Error(ErrorKind::StateExplosion,
                    "state left the explosion bound at t = " + std::to_string(task.time(k + 1)));
      }
      out.inputs.push_back(u);
      out.trajectory.times.push_back(task.time(k + 1));
      out.trajectory.states.push_back(x);
    }
  }
  return out;
}

void Scenario::validate() const {
  system.validate();
  if (position.size() != 2) throw Error(ErrorKind::UnsupportedDimension, "position must be 2-D");
  for (const int i : position)
    if (i < 0 || i >= system.nx()) throw Error(ErrorKind::DimensionMismatch, "position index");
  if (partition.workspace.dim() != 2) throw Error(ErrorKind::UnsupportedDimension, "workspace must be 2-D");
  if (initial_set.dim() != system.nx() || initial_state.size() != system.nx()) {
    throw Error(ErrorKind::DimensionMismatch, "initial set or state does not match the system");
  }
  if (initial_region.dim() != 2) throw Error(ErrorKind::DimensionMismatch, "initial region must be 2-D");
  for (int k = 0; k < 2; ++k) {
    const int i = position[k];
    if (initial_set.lower(i) < initial_region.lower(k) - 1e-12 ||
        initial_set.upper(i) > initial_region.upper(k) + 1e-12) {
      throw Error(ErrorKind::InvalidArgument, "initial set is not inside the initial region");
    }
  }
  if (!initial_set.contains(initial_state, 1e-12)) {
    throw Error(ErrorKind::InvalidArgument, "initial state is not in the initial set");
  }
  const Box& ws = partition.workspace;
  for (const auto& [name, entry] : regions) {
    if (entry.projection != position) continue;
    const Box hull = interval_hull(entry.set);
    if ((hull.lower.array() < ws.lower.array() - 1e-9).any() ||
        (hull.upper.array() > ws.upper.array() + 1e-9).any()) {
      throw Error(ErrorKind::InvalidArgument, "region " + name + " leaves the workspace");
    }
  }
  if (realizations < 0 || substeps < 1 || max_paths < 1) {
    throw Error(ErrorKind::InvalidArgument, "bad simulation settings");
  }
}

stl::RegionTable Scenario::region_table() const {
  stl::RegionTable t;
  t.regions = regions;
  t.obstacles = obstacles;
  t.obstacle_projection = position;
  return t;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage(stage);
    throw;
  }
}

}  // namespace

RunResult run_pipeline(const Scenario& s, int threads) {
  staged("scenario", [&] { s.validate(); return 0; });
  RunResult r;
  r.regions = s.region_table();

  auto t = Clock::now();
  r.partition = staged("partition", [&] { return build_partition(s.partition); });
  r.timing.partition = seconds_since(t);

  t = Clock::now();
  r.formula = staged("formula", [&] {
    return stl::rewrite_until(stl::parse(s.formula, &r.regions), s.until_split);
  });
  const auto abstraction = staged("formula", [&] { return stl::induced_ltl_targets(r.formula, r.regions); });
  const auto targets = order_targets(abstraction.targets);
  if (targets.empty()) {
    throw Error(ErrorKind::UnsupportedFragment, "formula has no region to reach", "formula");
  }
  std::vector<NamedRegion> extras = {{"pi0", CZ(s.initial_region)}};
  std::vector<std::string> accepting = {"pi0"};
  for (const auto& tg : targets) {
    if (tg.projection != s.position) {
      throw Error(ErrorKind::UnsupportedDimension,
                  "region of interest " + tg.name + " is not over the position", "formula");
    }
    extras.push_back({tg.name, tg.region});
    accepting.push_back(tg.name);
  }
  r.graph = staged("graph", [&] {
    return build_graph(r.partition, s.obstacles, extras, s.workspace(), s.partition.resolution());
  });
  r.paths = staged("graph", [&] {
    auto paths = admissible_paths(r.graph, accepting, s.max_paths);
    if (paths.empty()) throw Error(ErrorKind::NoPath, "no admissible path to the goal regions");
    return paths;
  });
  r.timing.graph = seconds_since(t);

  t = Clock::now();
  EvaluationConfig ec;
  ec.mode = s.eval_mode;
  ec.obstacles = s.obstacles;
  ec.workspace = s.workspace();
  ec.cell_weights = s.cell_weights;
  r.decomposition = staged("decompose", [&] {
    const Path& chosen = choose_path(r.paths, r.graph, ec);
    r.chosen_path = static_cast<int>(&chosen - r.paths.data());
    return decompose(chosen, r.graph, targets, abstraction.constraints, ec);
  });
  for (const auto& [name, set] : r.decomposition.regions) r.regions.regions[name] = {set, s.position};
  r.timing.decompose = seconds_since(t);

  t = Clock::now();
  SynthesisProblem sp;
  sp.system = s.system;
  sp.position = s.position;
  sp.initial_set = s.initial_set;
  sp.tasks = r.decomposition.tasks;
  sp.obstacles = s.obstacles;
  sp.workspace = s.workspace();
  sp.grid_resolution = s.partition.resolution();
  r.plan = staged("synthesis", [&] { return synthesize(sp, s.synthesis); });
  r.timing.synthesis = seconds_since(t);

  t = Clock::now();
  const auto ws = disturbance_realizations(s.seed, s.realizations, s.system.disturbance_set,
                                           total_steps(r.plan));
  r.runs.resize(ws.size());
  SimOptions so;
  so.substeps = s.substeps;
  const double scale = std::max({1.0, s.system.state_set.lower.cwiseAbs().maxCoeff(),
                                 s.system.state_set.upper.cwiseAbs().maxCoeff()});
  so.explosion_bound = 1e3 * scale;
  const int workers = std::max(
      1, std::min<int>(threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency()),
                       static_cast<int>(ws.size())));
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(ws.size());
  auto work = [&] {
    for (int i = next++; i < static_cast<int>(ws.size()); i = next++) {
      try {
        SeedRun& run = r.runs[i];
        run.index = i;
        run.disturbances = ws[i];
        run.sim = simulate(s.system, r.plan, s.initial_state, ws[i], so);
        run.verdict = stl::monitor(r.formula, run.sim.trajectory, r.regions);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) staged("simulation", [&]() -> int { std::rethrow_exception(e); });
  }
  r.all_satisfied = std::all_of(r.runs.begin(), r.runs.end(),
                                [](const SeedRun& x) { return x.verdict.satisfied; });
  r.timing.simulation = seconds_since(t);
  return r;
}

}  // namespace stlsynth
