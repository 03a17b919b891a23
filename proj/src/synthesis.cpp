#include "stlsynth/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <string>

#include "stlsynth/error.hpp"

namespace stlsynth {

void LinearSystem::validate() const {
  const int n = nx();
  if (A.cols() != n || B.rows() != n || C.rows() != n) {
    throw Error(ErrorKind::DimensionMismatch, "system matrices have inconsistent sizes");
  }
  if (state_set.dim() != n || input_set.dim() != nu() || disturbance_set.dim() != nw()) {
    throw Error(ErrorKind::DimensionMismatch, "constraint sets do not match the system sizes");
  }
  for (const Box* b : {&state_set, &input_set, &disturbance_set}) {
    if ((b->lower.array() > b->upper.array()).any()) {
      throw Error(ErrorKind::InvalidArgument, "box with lower > upper");
    }
  }
}

DiscreteModel discretize(const LinearSystem& sys, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
  const int n = sys.nx(), m = sys.nu(), p = sys.nw();
  MatrixXd big = MatrixXd::Zero(n + m + p, n + m + p);
  big.block(0, 0, n, n) = sys.A;
  big.block(0, n, n, m) = sys.B;
  big.block(0, n + m, n, p) = sys.C;
  const MatrixXd e = optim::expm(big * dt);
  return {e.block(0, 0, n, n), e.block(0, n, n, m), e.block(0, n + m, n, p), dt};
}

LiftedModel lift(const DiscreteModel& m, int steps) {
  const int n = static_cast<int>(m.Ad.rows());
  const int nu = static_cast<int>(m.Bd.cols());
  LiftedModel out;
  out.phi.push_back(MatrixXd::Identity(n, n));
  out.gamma.push_back(MatrixXd::Zero(n, nu * steps));
  for (int k = 0; k < steps; ++k) {
    out.phi.push_back(m.Ad * out.phi.back());
    MatrixXd g = m.Ad * out.gamma.back();
    g.block(0, k * nu, n, nu) += m.Bd;
    out.gamma.push_back(std::move(g));
  }
  return out;
}

std::vector<MatrixXd> generator_inputs(const LiftedModel& lifted, const MatrixXd& generators,
                                       const VectorXd& budget, const GeneratorObjective& obj,
                                       const optim::QpOptions& qp) {
  const int steps = static_cast<int>(lifted.phi.size()) - 1;
  const int n = static_cast<int>(lifted.phi[0].rows());
  const int nv = static_cast<int>(lifted.gamma[0].cols());
  const int m = steps > 0 ? nv / steps : 0;
  const int p = static_cast<int>(generators.cols());
  if (generators.rows() != n || budget.size() != m) {
    throw Error(ErrorKind::DimensionMismatch, "generator input problem sizes disagree");
  }
  std::vector<MatrixXd> out(steps, MatrixXd::Zero(m, p));
  if (p == 0 || steps == 0 || budget.maxCoeff() <= 0.0) return out;

  // Same Hessian block for every generator.
  MatrixXd hb = lifted.gamma[steps].transpose() * lifted.gamma[steps];
  for (int k = 1; k < steps; ++k)
    hb += obj.path_weight * lifted.gamma[k].transpose() * lifted.gamma[k];
  hb += obj.input_weight * MatrixXd::Identity(nv, nv);
  hb *= 2.0;

  const int total = 2 * p * nv;  // inputs then absolute-value bounds
  auto qpd = optim::QuadraticProgram::with_variables(total);
  for (int l = 0; l < p; ++l) {
    const VectorXd g = generators.col(l);
    VectorXd lin = lifted.gamma[steps].transpose() * (lifted.phi[steps] * g);
    for (int k = 1; k < steps; ++k)
      lin += obj.path_weight * lifted.gamma[k].transpose() * (lifted.phi[k] * g);
    qpd.hessian.block(l * nv, l * nv, nv, nv) = hb;
    qpd.linear.segment(l * nv, nv) = 2.0 * lin;
  }
  const int rows = 2 * p * nv + nv;
  qpd.ineq_matrix = MatrixXd::Zero(rows, total);
  qpd.ineq_lower = VectorXd::Constant(rows, -optim::kInf);
  qpd.ineq_upper = VectorXd::Constant(rows, optim::kInf);
  const int s0 = p * nv;
  int r = 0;
  for (int i = 0; i < p * nv; ++i, r += 2) {
    qpd.ineq_matrix(r, i) = 1.0;  // u - s <= 0
    qpd.ineq_matrix(r, s0 + i) = -1.0;
    qpd.ineq_upper(r) = 0.0;
    qpd.ineq_matrix(r + 1, i) = 1.0;  // u + s >= 0
    qpd.ineq_matrix(r + 1, s0 + i) = 1.0;
    qpd.ineq_lower(r + 1) = 0.0;
  }
  for (int i = 0; i < nv; ++i, ++r) {
    for (int l = 0; l < p; ++l) qpd.ineq_matrix(r, s0 + l * nv + i) = 1.0;
    qpd.ineq_upper(r) = budget(i % m);
  }
  for (int l = 0; l < p; ++l)
    for (int i = 0; i < nv; ++i) {
      qpd.lower(s0 + l * nv + i) = 0.0;
      qpd.upper(s0 + l * nv + i) = budget(i % m);
    }
  const auto res = optim::solve_qp(qpd, qp);

  for (int k = 0; k < steps; ++k)
    for (int l = 0; l < p; ++l) out[k].col(l) = res.x.segment(l * nv + k * m, m);
  // The splitting solver is only accurate to its tolerance; rescale so the
  // budget holds exactly.
  for (int k = 0; k < steps; ++k)
    for (int j = 0; j < m; ++j) {
      const double used = out[k].row(j).cwiseAbs().sum();
      if (used > budget(j)) out[k].row(j) *= budget(j) / used;
    }
  return out;
}

std::vector<Zonotope> error_tube(const DiscreteModel& m, const std::vector<MatrixXd>& gains,
                                 const Box& disturbance) {
  const int n = static_cast<int>(m.Ad.rows());
  std::vector<int> active;
  const VectorXd rw = disturbance.radius();
  for (int i = 0; i < rw.size(); ++i)
    if (rw(i) > 0.0) active.push_back(i);
  MatrixXd wg = MatrixXd::Zero(m.Ed.cols(), static_cast<int>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j) wg(active[j], static_cast<int>(j)) = rw(active[j]);
  const VectorXd step_center = m.Ed * disturbance.center();
  const MatrixXd step_gens = m.Ed * wg;

  std::vector<Zonotope> out;
  out.emplace_back(VectorXd::Zero(n), MatrixXd::Zero(n, 0));
  for (const auto& k : gains) {
    const MatrixXd closed = m.Ad - m.Bd * k;
    const Zonotope& e = out.back();
    MatrixXd g(n, e.num_generators() + step_gens.cols());
    g << closed * e.generators, step_gens;
    out.emplace_back(closed * e.center + step_center, std::move(g));
  }
  return out;
}

VectorXd TaskPlan::coefficients(const VectorXd& x) const {
  VectorXd xi(init_axes.size());
  const VectorXd c = init_box.center(), r = init_box.radius();
  for (std::size_t l = 0; l < init_axes.size(); ++l) {
    const int a = init_axes[l];
    xi(l) = std::clamp((x(a) - c(a)) / r(a), -1.0, 1.0);
  }
  return xi;
}

VectorXd TaskPlan::nominal_state(int k, const VectorXd& xi) const {
  return center_states[k] + generator_states[k] * xi;
}

VectorXd TaskPlan::control(int k, const VectorXd& x, const VectorXd& xi) const {
  return center_inputs[k] + generator_inputs[k] * xi - gains[k] * (x - nominal_state(k, xi));
}

bool TaskPlan::all_contained() const {
  return std::all_of(contained.begin(), contained.end(), [](char c) { return c != 0; });
}

bool SynthesisPlan::all_contained() const {
  return std::all_of(tasks.begin(), tasks.end(), [](const TaskPlan& t) { return t.all_contained(); });
}

double SynthesisPlan::end_time() const {
  return tasks.empty() ? 0.0 : tasks.back().time(tasks.back().steps);
}

namespace {

struct Halfspace {
  Point2 normal;
  double offset;
};

// Outward edge normals of a counter-clockwise convex polygon.
std::vector<Halfspace> halfspaces(const Polygon& poly) {
  std::vector<Halfspace> out;
  const std::size_t k = poly.size();
  for (std::size_t i = 0; i < k; ++i) {
    const Point2 e = poly[(i + 1) % k] - poly[i];
    const double len = e.norm();
    if (len < 1e-12) continue;
    const Point2 nrm(e.y() / len, -e.x() / len);
    out.push_back({nrm, nrm.dot(poly[i])});
  }
  return out;
}

Polygon region_polygon(const CZ& set, const std::string& what) {
  Polygon poly = vertices_2d(set);
  if (poly.size() < 3 || polygon_area(poly) < 1e-12) {
    throw Error(ErrorKind::Infeasible, what + " is degenerate");
  }
  return poly;
}

Point2 vertex_mean(const Polygon& poly) {
  Point2 c = Point2::Zero();
  for (const auto& v : poly) c += v;
  return c / static_cast<double>(poly.size());
}

Box position_box(const SynthesisProblem& p) {
  const int k = static_cast<int>(p.position.size());
  VectorXd lo(k), hi(k);
  for (int i = 0; i < k; ++i) {
    lo(i) = std::max(p.workspace.lower(i), p.system.state_set.lower(p.position[i]));
    hi(i) = std::min(p.workspace.upper(i), p.system.state_set.upper(p.position[i]));
  }
  return {lo, hi};
}

double box_distance(const Box& b, const Point2& q) {
  const double dx = std::max({b.lower(0) - q.x(), 0.0, q.x() - b.upper(0)});
  const double dy = std::max({b.lower(1) - q.y(), 0.0, q.y() - b.upper(1)});
  return std::hypot(dx, dy);
}

// Linear rows on the stacked center inputs.
struct RowSet {
  std::vector<VectorXd> rows;
  std::vector<double> lower, upper;

  void add(VectorXd row, double lo, double hi) {
    rows.push_back(std::move(row));
    lower.push_back(lo);
    upper.push_back(hi);
  }
};

struct CenterProblem {
  const LinearSystem* sys;
  const LiftedModel* lifted;
  MatrixXd proj;  // position selector
  VectorXd x0;
  std::vector<Zonotope> spread;  // per step, generators of all uncertainty
  Polygon cell;
  Polygon target;
  std::vector<char> target_steps;
  std::vector<Box> obstacles;
  VectorXd input_lower, input_upper;  // per stacked input
  Point2 target_point;
  double input_weight;
  double rest_weight;
  double dt;
  double margin;
};

// Shortest 8-connected route over admissible grid points of a convex region,
// obstacles inflated by `inflate`. Straight segment when no route exists.
std::vector<Point2> grid_route(const SampleGrid& grid, const Point2& from, const Point2& to,
                               const Polygon& region, const Box& area,
                               const std::vector<Box>& obstacles, double inflate) {
  const int total = grid.size();
  std::vector<char> ok(total, 0);
  for (int k = 0; k < total; ++k) {
    const Point2 q = grid.point(k);
    if (!convex_contains(region, q, 1e-12) || !area.contains(q)) continue;
    bool free = true;
    for (const auto& o : obstacles) free = free && box_distance(o, q) > inflate;
    ok[k] = free;
  }
  auto nearest = [&](const Point2& q) {
    int best = -1;
    double bd = 0.0;
    for (int k = 0; k < total; ++k) {
      if (!ok[k]) continue;
      const double d = (grid.point(k) - q).squaredNorm();
      if (best < 0 || d < bd) {
        best = k;
        bd = d;
      }
    }
    return best;
  };
  const int src = nearest(from), dst = nearest(to);
  if (src < 0 || dst < 0) return {from, to};
  std::vector<double> dist(total, optim::kInf);
  std::vector<int> prev(total, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[src] = 0.0;
  queue.push({0.0, src});
  const int w = grid.nx() + 1;
  while (!queue.empty()) {
    const auto [d, k] = queue.top();
    queue.pop();
    if (d > dist[k]) continue;
    if (k == dst) break;
    const int i = k % w, j = k / w;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        const int a = i + di, b = j + dj;
        if ((di == 0 && dj == 0) || a < 0 || b < 0 || a > grid.nx() || b > grid.ny()) continue;
        const int nb = grid.index(a, b);
        if (!ok[nb]) continue;
        const double nd = d + (grid.point(nb) - grid.point(k)).norm();
        if (nd < dist[nb]) {
          dist[nb] = nd;
          prev[nb] = k;
          queue.push({nd, nb});
        }
      }
  }
  if (!std::isfinite(dist[dst])) return {from, to};
  std::vector<Point2> route = {to};
  for (int k = dst; k >= 0; k = prev[k]) route.push_back(grid.point(k));
  route.push_back(from);
  std::reverse(route.begin(), route.end());
  return route;
}

// `steps + 1` points evenly spaced by arc length along a polyline.
std::vector<Point2> resample(const std::vector<Point2>& route, int steps) {
  std::vector<double> acc = {0.0};
  for (std::size_t i = 1; i < route.size(); ++i)
    acc.push_back(acc.back() + (route[i] - route[i - 1]).norm());
  std::vector<Point2> out;
  std::size_t seg = 1;
  for (int k = 0; k <= steps; ++k) {
    const double s = acc.back() * k / steps;
    while (seg + 1 < route.size() && acc[seg] < s) ++seg;
    const double len = acc[seg] - acc[seg - 1];
    const double f = len > 0.0 ? std::clamp((s - acc[seg - 1]) / len, 0.0, 1.0) : 1.0;
    out.push_back(route[seg - 1] + f * (route[seg] - route[seg - 1]));
  }
  return out;
}

// Stacked-input row for r'x_k with the tightened bounds.
void add_state_row(RowSet& rs, const CenterProblem& cp, int k, const VectorXd& r, double lo,
                   double hi, double theta) {
  const double free_part = r.dot(cp.lifted->phi[k] * cp.x0);
  const double up = std::isfinite(hi) ? hi - theta * support(cp.spread[k], r) - cp.margin : hi;
  const double dn = std::isfinite(lo) ? lo + theta * support(cp.spread[k], -r) + cp.margin : lo;
  rs.add(cp.lifted->gamma[k].transpose() * r, dn - free_part, up - free_part);
}

struct CenterSolution {
  bool ok = false;
  VectorXd inputs;
};

// `theta_state` scales the tightening of the state box, `theta` that of
// cells, targets and obstacles.
CenterSolution solve_center(const CenterProblem& cp, const std::vector<Point2>& guess,
                            double theta_state, double theta, double shrink,
                            const optim::QpOptions& qpo) {
  const int steps = static_cast<int>(cp.lifted->phi.size()) - 1;
  const int nv = static_cast<int>(cp.lifted->gamma[0].cols());
  const int n = static_cast<int>(cp.x0.size());
  RowSet rs;
  const auto cell_hs = halfspaces(cp.cell);
  const auto target_hs = halfspaces(cp.target);
  const Point2 cell_mid = vertex_mean(cp.cell);
  for (int k = 1; k <= steps; ++k) {
    for (int i = 0; i < n; ++i) {
      VectorXd r = VectorXd::Unit(n, i);
      add_state_row(rs, cp, k, r, cp.sys->state_set.lower(i), cp.sys->state_set.upper(i),
                    theta_state);
    }
    for (const auto& h : cell_hs) {
      const double mid = h.normal.dot(cell_mid);
      const double off = mid + (1.0 - shrink) * (h.offset - mid);
      add_state_row(rs, cp, k, cp.proj.transpose() * h.normal, -optim::kInf, off, theta);
    }
    if (cp.target_steps[k]) {
      for (const auto& h : target_hs)
        add_state_row(rs, cp, k, cp.proj.transpose() * h.normal, -optim::kInf, h.offset, theta);
    }
    const Point2& q = guess[k];
    for (const auto& o : cp.obstacles) {
      const double d[4] = {o.lower(0) - q.x(), q.x() - o.upper(0), o.lower(1) - q.y(),
                           q.y() - o.upper(1)};
      const int face = static_cast<int>(std::max_element(d, d + 4) - d);
      const VectorXd r = cp.proj.transpose() * Point2::Unit(face / 2);
      if (face == 0 || face == 2)
        add_state_row(rs, cp, k, r, -optim::kInf, o.lower(face / 2), theta);
      else
        add_state_row(rs, cp, k, r, o.upper(face / 2), optim::kInf, theta);
    }
  }

  auto qp = optim::QuadraticProgram::with_variables(nv);
  const MatrixXd pg = cp.proj * cp.lifted->gamma[steps];
  const Point2 free_end = cp.proj * (cp.lifted->phi[steps] * cp.x0);
  // Non-position coordinates are pulled to zero at the end.
  const MatrixXd rest = MatrixXd::Identity(n, n) - cp.proj.transpose() * cp.proj;
  const MatrixXd rg = rest * cp.lifted->gamma[steps];
  const VectorXd rest_end = rest * (cp.lifted->phi[steps] * cp.x0);
  qp.hessian = 2.0 * (pg.transpose() * pg + cp.rest_weight * rg.transpose() * rg +
                      cp.input_weight * cp.dt * MatrixXd::Identity(nv, nv));
  qp.linear = 2.0 * (pg.transpose() * (free_end - cp.target_point) +
                     cp.rest_weight * rg.transpose() * rest_end);
  const int rows = static_cast<int>(rs.rows.size());
  qp.ineq_matrix.resize(rows, nv);
  qp.ineq_lower.resize(rows);
  qp.ineq_upper.resize(rows);
  for (int i = 0; i < rows; ++i) {
    qp.ineq_matrix.row(i) = rs.rows[i].transpose();
    qp.ineq_lower(i) = rs.lower[i];
    qp.ineq_upper(i) = rs.upper[i];
    if (rs.lower[i] > rs.upper[i]) return {};
  }
  qp.lower = cp.input_lower;
  qp.upper = cp.input_upper;
  const auto res = optim::solve_qp(qp, qpo);
  if (res.status == optim::Status::Infeasible) return {};
  // Accept only if the rows actually hold; the tightening margin absorbs
  // the solver tolerance.
  const VectorXd ax = qp.ineq_matrix * res.x;
  double worst = 0.0;
  for (int i = 0; i < rows; ++i)
    worst = std::max({worst, qp.ineq_lower(i) - ax(i), ax(i) - qp.ineq_upper(i)});
  if (worst > 0.5 * cp.margin) return {};
  return {true, res.x};
}

std::vector<Point2> positions(const CenterProblem& cp, const VectorXd& u) {
  std::vector<Point2> out;
  for (std::size_t k = 0; k < cp.lifted->phi.size(); ++k)
    out.push_back(cp.proj * (cp.lifted->phi[k] * cp.x0 + cp.lifted->gamma[k] * u));
  return out;
}

optim::LqrWeights default_weights(const SynthesisProblem& p) {
  optim::LqrWeights w{VectorXd::Zero(p.system.nx()), VectorXd::Constant(p.system.nu(), 0.1)};
  for (const int i : p.position) w.q(i) = 1.0;
  return w;
}

TaskPlan synthesize_task(const SynthesisProblem& prob, const SynthesisOptions& opts, int index,
                         const Box& init, const Point2& target_point) {
  const auto& task = prob.tasks[index];
  const auto& sys = prob.system;
  const int n = sys.nx(), m = sys.nu();
  const int steps = opts.steps_per_task;
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "steps per task must be positive");

  TaskPlan plan;
  plan.task = index;
  plan.t0 = task.window.a;
  plan.t1 = task.window.b;
  plan.steps = steps;
  plan.dt = (task.window.b - task.window.a) / steps;
  plan.model = discretize(sys, plan.dt);
  plan.init_box = init;
  plan.target_point = target_point;
  const VectorXd rad = init.radius();
  for (int i = 0; i < n; ++i)
    if (rad(i) > 1e-12) plan.init_axes.push_back(i);
  const int p = static_cast<int>(plan.init_axes.size());
  plan.init_generators = MatrixXd::Zero(n, p);
  for (int l = 0; l < p; ++l) plan.init_generators(plan.init_axes[l], l) = rad(plan.init_axes[l]);

  const optim::LqrWeights w = opts.lqr.q.size() ? opts.lqr : default_weights(prob);
  plan.gains = optim::finite_horizon_riccati(plan.model.Ad, plan.model.Bd, w, steps).gains;
  plan.error_sets = error_tube(plan.model, plan.gains, sys.disturbance_set);
  const LiftedModel lifted = lift(plan.model, steps);

  const VectorXd budget = opts.generator_budget * sys.input_set.radius();
  plan.generator_inputs = generator_inputs(lifted, plan.init_generators, budget, opts.generator,
                                           opts.qp);
  for (int k = 0; k <= steps; ++k) {
    MatrixXd gs = lifted.phi[k] * plan.init_generators;
    for (int j = 0; j < k; ++j)
      gs += lifted.gamma[k].block(0, j * m, n, m) * plan.generator_inputs[j];
    plan.generator_states.push_back(std::move(gs));
  }

  CenterProblem cp;
  cp.sys = &sys;
  cp.lifted = &lifted;
  cp.proj = projection_matrix(prob.position, n);
  cp.x0 = init.center();
  for (int k = 0; k <= steps; ++k) {
    const Zonotope& e = plan.error_sets[k];
    MatrixXd g(n, p + e.num_generators());
    g << plan.generator_states[k], e.generators;
    cp.spread.emplace_back(e.center, std::move(g));
  }
  cp.cell = region_polygon(task.cell, "cell " + task.label);
  cp.target = region_polygon(task.target_set, "target set " + task.target_label);
  cp.target_steps.assign(steps + 1, 0);
  cp.target_steps[steps] = 1;
  if (task.terminal && task.goal_op == stl::Op::Always) {
    for (int k = 1; k <= steps; ++k)
      if (plan.time(k) >= task.goal_interval.a - 1e-9) cp.target_steps[k] = 1;
  }
  cp.obstacles = prob.obstacles;
  cp.input_lower.resize(steps * m);
  cp.input_upper.resize(steps * m);
  for (int k = 0; k < steps; ++k) {
    const Zonotope& e = plan.error_sets[k];
    for (int j = 0; j < m; ++j) {
      const VectorXd row = plan.gains[k].row(j).transpose();
      const double headroom = std::max(support(e, row), support(e, -row));
      const double lo = sys.input_set.lower(j) + budget(j) + headroom;
      const double hi = sys.input_set.upper(j) - budget(j) - headroom;
      if (lo > hi) {
        throw Error(ErrorKind::Infeasible, "input set too small for the generator budget and "
                                           "feedback in task " + std::to_string(index + 1));
      }
      cp.input_lower(k * m + j) = lo;
      cp.input_upper(k * m + j) = hi;
    }
  }
  cp.target_point = target_point;
  cp.input_weight = opts.input_weight;
  cp.rest_weight = opts.rest_weight;
  cp.dt = plan.dt;
  cp.margin = opts.safety_margin;

  // First guess for the obstacle faces: a grid route around the obstacles.
  const SampleGrid grid(prob.workspace, prob.grid_resolution > 0.0
                                            ? prob.grid_resolution
                                            : default_grid_resolution(prob.workspace));
  const std::vector<Point2> line =
      resample(grid_route(grid, cp.proj * cp.x0, target_point, cp.cell, position_box(prob),
                          prob.obstacles, opts.target_clearance),
               steps);

  // Full tightening first. The state box gives way before the regions do:
  // an initial set near the state bound may be impossible to contain.
  std::vector<std::pair<double, double>> levels;
  for (const double t : {1.0, 0.75, 0.5, 0.25, 0.0}) levels.emplace_back(t, 1.0);
  for (const double t : {0.75, 0.5, 0.25, 0.0}) levels.emplace_back(0.0, t);

  CenterSolution sol;
  std::pair<double, double> used{0.0, 0.0};
  for (const auto& level : levels) {
    for (const double shrink : {opts.shrink, 0.0}) {
      std::vector<Point2> guess = line;
      for (int round = 0; round < std::max(1, opts.convexification_rounds); ++round) {
        auto attempt = solve_center(cp, guess, level.first, level.second, shrink, opts.qp);
        if (!attempt.ok) break;
        sol = attempt;
        auto next = positions(cp, attempt.inputs);
        bool same = true;
        for (int k = 1; k <= steps && same; ++k)
          for (const auto& o : cp.obstacles) {
            auto face = [&](const Point2& q) {
              const double d[4] = {o.lower(0) - q.x(), q.x() - o.upper(0), o.lower(1) - q.y(),
                                   q.y() - o.upper(1)};
              return std::max_element(d, d + 4) - d;
            };
            if (face(next[k]) != face(guess[k])) same = false;
          }
        if (same) break;
        guess = std::move(next);
      }
      if (sol.ok) {
        used = level;
        break;
      }
    }
    if (sol.ok) break;
  }
  if (!sol.ok) {
    throw Error(ErrorKind::Infeasible,
                "no feasible reference in cell " + task.label + " (task " + std::to_string(index + 1) + ")");
  }
  plan.state_robustness = used.first;
  plan.robustness = used.second;

  for (int k = 0; k < steps; ++k) plan.center_inputs.push_back(sol.inputs.segment(k * m, m));
  for (int k = 0; k <= steps; ++k) {
    plan.center_states.push_back(lifted.phi[k] * cp.x0 + lifted.gamma[k] * sol.inputs);
    const Zonotope& s = cp.spread[k];
    plan.tubes.emplace_back(plan.center_states[k] + s.center, s.generators);
    plan.contained.push_back(contains_set(task.cell, linear_map(cp.proj, plan.tubes[k]), 1e-9));
  }
  return plan;
}

}  // namespace

std::vector<Point2> choose_target_points(const SynthesisProblem& p, double clearance) {
  constexpr double kClearancePenalty = 10.0;
  std::vector<Point2> out(p.tasks.size());
  if (p.tasks.empty()) return out;
  const Box area = position_box(p);
  const SampleGrid grid(p.workspace, p.grid_resolution > 0.0 ? p.grid_resolution
                                                             : default_grid_resolution(p.workspace));
  Point2 next = interval_hull(p.tasks.back().target_set).center();
  for (int i = static_cast<int>(p.tasks.size()) - 1; i >= 0; --i) {
    const Polygon poly = clip_convex(vertices_2d(p.tasks[i].target_set), box_polygon(area));
    const auto hs = halfspaces(poly);
    bool found = false;
    double best_score = 0.0;
    Point2 best = Point2::Zero();
    for (int k = 0; k < grid.size(); ++k) {
      const Point2 q = grid.point(k);
      if (!convex_contains(poly, q, 1e-12)) continue;
      double clear = optim::kInf;
      for (const auto& o : p.obstacles) clear = std::min(clear, box_distance(o, q));
      if (clear <= 0.0) continue;
      for (const auto& h : hs) clear = std::min(clear, h.offset - h.normal.dot(q));
      // Closeness to the next point traded against missing clearance.
      const double score = (q - next).norm() + kClearancePenalty * std::max(0.0, clearance - clear);
      if (!found || score < best_score) {
        found = true;
        best_score = score;
        best = q;
      }
    }
    out[i] = found ? best : (poly.empty() ? next : vertex_mean(poly));
    next = out[i];
  }
  return out;
}

SynthesisPlan synthesize(const SynthesisProblem& p, const SynthesisOptions& opts) {
  p.system.validate();
  if (p.position.size() != 2) {
    throw Error(ErrorKind::UnsupportedDimension, "synthesis needs a 2-D position projection");
  }
  if (p.initial_set.dim() != p.system.nx()) {
    throw Error(ErrorKind::DimensionMismatch, "initial set does not match the state size");
  }
  SynthesisPlan plan;
  const auto points = choose_target_points(p, opts.target_clearance);
  Box init = p.initial_set;
  for (int i = 0; i < static_cast<int>(p.tasks.size()); ++i) {
    plan.tasks.push_back(synthesize_task(p, opts, i, init, points[i]));
    init = interval_hull(plan.tasks.back().tubes.back());
  }
  return plan;
}

}  // namespace stlsynth
