#include "stlsynth/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "stlsynth/error.hpp"
#include "stlsynth/render.hpp"

namespace stlsynth {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::Parse, where + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) bad(where, std::string("missing field '") + key + "'");
  return *it;
}

template <class T>
T as(const Json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    bad(where, e.what());
  }
}

template <class T>
T opt(const Json& j, const char* key, T fallback, const std::string& where) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : as<T>(*it, where + "." + key);
}

Json point_to_json(const Point2& p) { return Json::array({p.x(), p.y()}); }

Json polygon_to_json(const Polygon& poly) {
  Json a = Json::array();
  for (const auto& p : poly) a.push_back(point_to_json(p));
  return a;
}

}  // namespace

Json vector_to_json(const VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) bad("vector", "expected an array of numbers");
  VectorXd v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = as<double>(j[i], "vector");
  return v;
}

Json matrix_to_json(const MatrixXd& m) {
  Json a = Json::array();
  for (int i = 0; i < m.rows(); ++i) a.push_back(vector_to_json(m.row(i).transpose()));
  return a;
}

MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array()) bad("matrix", "expected an array of rows");
  if (j.empty()) return MatrixXd(0, 0);
  const int cols = static_cast<int>(j[0].size());
  MatrixXd m(static_cast<int>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const VectorXd row = vector_from_json(j[i]);
    if (row.size() != cols) bad("matrix", "ragged rows");
    m.row(static_cast<int>(i)) = row.transpose();
  }
  return m;
}

Json box_to_json(const Box& b) {
  return {{"lower", vector_to_json(b.lower)}, {"upper", vector_to_json(b.upper)}};
}

Box box_from_json(const Json& j) {
  const VectorXd lo = vector_from_json(field(j, "lower", "box"));
  const VectorXd hi = vector_from_json(field(j, "upper", "box"));
  if (lo.size() != hi.size()) bad("box", "lower and upper differ in size");
  if ((lo.array() > hi.array()).any()) bad("box", "lower exceeds upper");
  return {lo, hi};
}

Json zonotope_to_json(const Zonotope& z) {
  return {{"center", vector_to_json(z.center)}, {"generators", matrix_to_json(z.generators)}};
}

Json cz_to_json(const CZ& y) {
  Json j = {{"center", vector_to_json(y.center)}, {"generators", matrix_to_json(y.generators)}};
  if (!y.is_zonotope()) {
    j["A"] = matrix_to_json(y.A);
    j["b"] = vector_to_json(y.b);
  }
  return j;
}

CZ cz_from_json(const Json& j) {
  if (j.contains("box")) return CZ(box_from_json(j["box"]));
  const VectorXd c = vector_from_json(field(j, "center", "set"));
  MatrixXd g = matrix_from_json(field(j, "generators", "set"));
  if (g.size() == 0) g = MatrixXd::Zero(c.size(), 0);
  CZ y = j.contains("A") ? CZ(c, g, matrix_from_json(j["A"]), vector_from_json(field(j, "b", "set")))
                         : CZ(c, g);
  try {
    y.validate();
  } catch (const Error& e) {
    bad("set", e.what());
  }
  return y;
}

Scenario scenario_from_json(const Json& j) {
  Scenario s;
  s.name = opt<std::string>(j, "name", "scenario", "scenario");
  const Json& sys = field(j, "system", "scenario");
  s.system.A = matrix_from_json(field(sys, "A", "system"));
  s.system.B = matrix_from_json(field(sys, "B", "system"));
  s.system.C = matrix_from_json(field(sys, "C", "system"));
  s.system.state_set = box_from_json(field(sys, "state_set", "system"));
  s.system.input_set = box_from_json(field(sys, "input_set", "system"));
  s.system.disturbance_set = box_from_json(field(sys, "disturbance_set", "system"));
  s.position = as<std::vector<int>>(field(j, "position", "scenario"), "position");

  s.partition.workspace = box_from_json(field(j, "workspace", "scenario"));
  const Json& part = field(j, "partition", "scenario");
  if (part.contains("centers")) {
    for (const auto& c : part["centers"]) {
      const auto xy = as<std::vector<double>>(c, "partition.centers");
      if (xy.size() != 2) bad("partition.centers", "centers are 2-D points");
      s.partition.centers.emplace_back(xy[0], xy[1]);
    }
  }
  if (part.contains("random")) {
    s.partition.random = RandomCenters{as<int>(field(part["random"], "count", "partition.random"), "count"),
                                       opt<std::uint64_t>(part["random"], "seed", 0, "partition.random")};
  }
  s.partition.connections =
      opt<std::vector<std::vector<int>>>(part, "connections", {}, "partition");
  s.partition.eps = opt<double>(part, "eps", 0.1, "partition");
  s.partition.neighbor_count = opt<int>(part, "neighbor_count", 2, "partition");
  s.partition.grid_resolution = opt<double>(part, "grid_resolution", 0.0, "partition");

  if (j.contains("obstacles"))
    for (const auto& o : j["obstacles"]) s.obstacles.push_back(box_from_json(o));
  s.initial_set = box_from_json(field(j, "initial_set", "scenario"));
  s.initial_region = box_from_json(field(j, "initial_region", "scenario"));
  s.initial_state = vector_from_json(field(j, "initial_state", "scenario"));
  if (j.contains("regions")) {
    for (const auto& [name, entry] : j["regions"].items()) {
      const std::string where = "regions." + name;
      s.regions[name] = {cz_from_json(field(entry, "set", where)),
                         as<std::vector<int>>(field(entry, "projection", where), where)};
    }
  }
  s.formula = as<std::string>(field(j, "formula", "scenario"), "formula");
  if (j.contains("until_split") && !j["until_split"].is_null())
    s.until_split = as<double>(j["until_split"], "until_split");

  if (j.contains("evaluation")) {
    const Json& e = j["evaluation"];
    try {
      s.eval_mode = parse_eval_mode(opt<std::string>(e, "mode", "admissible-volume", "evaluation"));
    } catch (const Error& err) {
      bad("evaluation.mode", err.what());
    }
    s.cell_weights = opt<std::map<std::string, double>>(e, "cell_weights", {}, "evaluation");
  }

  if (j.contains("synthesis")) {
    const Json& y = j["synthesis"];
    const std::string w = "synthesis";
    auto& o = s.synthesis;
    o.steps_per_task = opt<int>(y, "steps_per_task", o.steps_per_task, w);
    if (y.contains("lqr")) {
      o.lqr.q = vector_from_json(field(y["lqr"], "q", "synthesis.lqr"));
      o.lqr.r = vector_from_json(field(y["lqr"], "r", "synthesis.lqr"));
    }
    o.shrink = opt<double>(y, "shrink", o.shrink, w);
    o.input_weight = opt<double>(y, "input_weight", o.input_weight, w);
    o.rest_weight = opt<double>(y, "rest_weight", o.rest_weight, w);
    o.generator_budget = opt<double>(y, "generator_budget", o.generator_budget, w);
    o.generator.path_weight = opt<double>(y, "generator_path_weight", o.generator.path_weight, w);
    o.generator.input_weight = opt<double>(y, "generator_input_weight", o.generator.input_weight, w);
    o.safety_margin = opt<double>(y, "safety_margin", o.safety_margin, w);
    o.convexification_rounds = opt<int>(y, "convexification_rounds", o.convexification_rounds, w);
    o.target_clearance = opt<double>(y, "target_clearance", o.target_clearance, w);
    o.qp.max_iterations = opt<int>(y, "qp_max_iterations", o.qp.max_iterations, w);
    o.qp.tolerance = opt<double>(y, "qp_tolerance", o.qp.tolerance, w);
  }
  if (j.contains("simulation")) {
    const Json& m = j["simulation"];
    s.seed = opt<std::uint64_t>(m, "seed", s.seed, "simulation");
    s.realizations = opt<int>(m, "realizations", s.realizations, "simulation");
    s.substeps = opt<int>(m, "substeps", s.substeps, "simulation");
    s.max_paths = opt<int>(m, "max_paths", s.max_paths, "simulation");
  }
  return s;
}

Json scenario_to_json(const Scenario& s) {
  Json j;
  j["name"] = s.name;
  j["system"] = {{"A", matrix_to_json(s.system.A)},
                 {"B", matrix_to_json(s.system.B)},
                 {"C", matrix_to_json(s.system.C)},
                 {"state_set", box_to_json(s.system.state_set)},
                 {"input_set", box_to_json(s.system.input_set)},
                 {"disturbance_set", box_to_json(s.system.disturbance_set)}};
  j["position"] = s.position;
  j["workspace"] = box_to_json(s.partition.workspace);
  Json part;
  Json centers = Json::array();
  for (const auto& c : s.partition.centers) centers.push_back(point_to_json(c));
  part["centers"] = centers;
  if (s.partition.random) part["random"] = {{"count", s.partition.random->count}, {"seed", s.partition.random->seed}};
  part["connections"] = s.partition.connections;
  part["eps"] = s.partition.eps;
  part["neighbor_count"] = s.partition.neighbor_count;
  part["grid_resolution"] = s.partition.grid_resolution;
  j["partition"] = part;
  j["obstacles"] = Json::array();
  for (const auto& o : s.obstacles) j["obstacles"].push_back(box_to_json(o));
  j["initial_set"] = box_to_json(s.initial_set);
  j["initial_region"] = box_to_json(s.initial_region);
  j["initial_state"] = vector_to_json(s.initial_state);
  j["regions"] = Json::object();
  for (const auto& [name, e] : s.regions)
    j["regions"][name] = {{"set", cz_to_json(e.set)}, {"projection", e.projection}};
  j["formula"] = s.formula;
  j["until_split"] = s.until_split ? Json(*s.until_split) : Json(nullptr);
  j["evaluation"] = {{"mode", std::string(to_string(s.eval_mode))}, {"cell_weights", s.cell_weights}};
  const auto& o = s.synthesis;
  Json y = {{"steps_per_task", o.steps_per_task},
            {"shrink", o.shrink},
            {"input_weight", o.input_weight},
            {"rest_weight", o.rest_weight},
            {"generator_budget", o.generator_budget},
            {"generator_path_weight", o.generator.path_weight},
            {"generator_input_weight", o.generator.input_weight},
            {"safety_margin", o.safety_margin},
            {"convexification_rounds", o.convexification_rounds},
            {"target_clearance", o.target_clearance},
            {"qp_max_iterations", o.qp.max_iterations},
            {"qp_tolerance", o.qp.tolerance}};
  if (o.lqr.q.size()) y["lqr"] = {{"q", vector_to_json(o.lqr.q)}, {"r", vector_to_json(o.lqr.r)}};
  j["synthesis"] = y;
  j["simulation"] = {{"seed", s.seed},
                     {"realizations", s.realizations},
                     {"substeps", s.substeps},
                     {"max_paths", s.max_paths}};
  return j;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::Io, "cannot open scenario " + file.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, file.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

Json timing_to_json(const StageTiming& t) {
  return {{"partition", t.partition},
          {"graph", t.graph},
          {"decompose", t.decompose},
          {"synthesis", t.synthesis},
          {"simulation", t.simulation}};
}

Json result_to_json(const Scenario& s, const RunResult& r) {
  Json j;
  j["scenario"] = s.name;
  j["formula"] = stl::print(r.formula);
  j["satisfied"] = r.all_satisfied;

  Json cells = Json::array();
  for (std::size_t i = 0; i < r.partition.cells.size(); ++i) {
    cells.push_back({{"label", r.partition.labels[i]},
                     {"set", cz_to_json(r.partition.cells[i])},
                     {"vertices", polygon_to_json(vertices_2d(r.partition.cells[i]))}});
  }
  j["partition"] = {{"zonotope_count", r.partition.zonotope_count},
                    {"fill_count", r.partition.fill_count},
                    {"cells", cells}};

  Json edges = Json::array();
  for (int a = 0; a < r.graph.size(); ++a)
    for (int b = a + 1; b < r.graph.size(); ++b)
      if (r.graph.edge(a, b)) edges.push_back({r.graph.labels[a], r.graph.labels[b]});
  j["graph"] = {{"labels", r.graph.labels}, {"edges", edges}};

  EvaluationConfig ec;
  ec.mode = s.eval_mode;
  ec.obstacles = s.obstacles;
  ec.workspace = s.workspace();
  ec.cell_weights = s.cell_weights;
  Json paths = Json::array();
  for (const auto& p : r.paths)
    paths.push_back({{"cells", p.labels}, {"evaluation", evaluate_path(p, r.graph, ec)}});
  j["paths"] = paths;
  j["chosen_path"] = r.chosen_path;

  Json tasks = Json::array();
  const auto& d = r.decomposition;
  for (std::size_t i = 0; i < d.tasks.size(); ++i) {
    const auto& t = d.tasks[i];
    tasks.push_back({{"cell", t.label},
                     {"window", {t.window.a, t.window.b}},
                     {"evaluation", d.evaluations[i]},
                     {"duration", d.durations[i]},
                     {"init", t.init_label},
                     {"target", t.target_label},
                     {"terminal", t.terminal},
                     {"formula", stl::print(t.formula)}});
  }
  j["decomposition"] = {{"tasks", tasks}};

  Json plan = Json::array();
  for (const auto& tp : r.plan.tasks) {
    Json steps = Json::array();
    for (int k = 0; k <= tp.steps; ++k) {
      Json st = {{"t", tp.time(k)},
                 {"center_state", vector_to_json(tp.center_states[k])},
                 {"tube", zonotope_to_json(tp.tubes[k])},
                 {"contained", tp.contained[k] != 0}};
      if (k < tp.steps) {
        st["center_input"] = vector_to_json(tp.center_inputs[k]);
        st["generator_inputs"] = matrix_to_json(tp.generator_inputs[k]);
        st["gain"] = matrix_to_json(tp.gains[k]);
      }
      steps.push_back(std::move(st));
    }
    plan.push_back({{"task", tp.task},
                    {"t0", tp.t0},
                    {"t1", tp.t1},
                    {"dt", tp.dt},
                    {"robustness", tp.robustness},
                    {"state_robustness", tp.state_robustness},
                    {"target_point", point_to_json(tp.target_point)},
                    {"init_box", box_to_json(tp.init_box)},
                    {"steps", steps}});
  }
  j["plan"] = {{"tasks", plan}, {"all_contained", r.plan.all_contained()}};

  Json runs = Json::array();
  for (const auto& run : r.runs) {
    Json states = Json::array();
    for (const auto& x : run.sim.trajectory.states) states.push_back(vector_to_json(x));
    Json inputs = Json::array();
    for (const auto& u : run.sim.inputs) inputs.push_back(vector_to_json(u));
    runs.push_back({{"index", run.index},
                    {"satisfied", run.verdict.satisfied},
                    {"witness", run.verdict.witness ? Json(*run.verdict.witness) : Json(nullptr)},
                    {"saturated", run.sim.saturated},
                    {"times", run.sim.trajectory.times},
                    {"states", states},
                    {"inputs", inputs}});
  }
  j["runs"] = runs;
  j["scene"] = scene_to_json(make_scene(s, r));
  return j;
}

void write_file_atomic(const std::filesystem::path& file, const std::string& content) {
  const auto tmp = std::filesystem::path(file.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot move " + tmp.string() + " to " + file.string());
}

std::string trajectory_csv(const SimResult& sim) {
  const auto& tr = sim.trajectory;
  std::ostringstream os;
  const int n = tr.states.empty() ? 0 : static_cast<int>(tr.states[0].size());
  const int m = sim.inputs.empty() ? 0 : static_cast<int>(sim.inputs[0].size());
  os << "t";
  for (int i = 0; i < n; ++i) os << ",x" << i;
  for (int i = 0; i < m; ++i) os << ",u" << i;
  os << "\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    os << num(tr.times[k]);
    for (int i = 0; i < n; ++i) os << ',' << num(tr.states[k](i));
    if (m > 0) {
      const VectorXd& u = sim.inputs[std::min(k, sim.inputs.size() - 1)];
      for (int i = 0; i < m; ++i) os << ',' << num(u(i));
    }
    os << "\n";
  }
  return os.str();
}

stl::SampledTrajectory trajectory_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "empty trajectory file");
  std::vector<int> state_cols;
  int time_col = -1;
  {
    std::istringstream hs(line);
    std::string name;
    for (int c = 0; std::getline(hs, name, ','); ++c) {
      while (!name.empty() && (name.back() == '\r' || name.back() == ' ')) name.pop_back();
      while (!name.empty() && name.front() == ' ') name.erase(name.begin());
      if (name == "t") time_col = c;
      else if (!name.empty() && name[0] == 'x') state_cols.push_back(c);
    }
  }
  if (time_col < 0 || state_cols.empty()) {
    throw Error(ErrorKind::Parse, "trajectory header needs a t column and x columns");
  }
  stl::SampledTrajectory tr;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::vector<double> vals;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw Error(ErrorKind::Parse, "bad number on trajectory row " + std::to_string(row));
      }
    }
    if (static_cast<int>(vals.size()) <= std::max(time_col, state_cols.back())) {
      throw Error(ErrorKind::Parse, "short trajectory row " + std::to_string(row));
    }
    VectorXd x(static_cast<int>(state_cols.size()));
    for (std::size_t i = 0; i < state_cols.size(); ++i) x(static_cast<int>(i)) = vals[state_cols[i]];
    if (!tr.times.empty() && vals[time_col] <= tr.times.back()) {
      throw Error(ErrorKind::Parse, "trajectory times must increase (row " + std::to_string(row) + ")");
    }
    tr.times.push_back(vals[time_col]);
    tr.states.push_back(std::move(x));
  }
  if (tr.times.empty()) throw Error(ErrorKind::Parse, "trajectory has no samples");
  return tr;
}

void write_artifacts(const std::filesystem::path& dir, const Scenario& s, const RunResult& r,
                     const ArtifactOptions& opts) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string());
  const Json result = result_to_json(s, r);
  write_file_atomic(dir / "result.json", result.dump(1) + "\n");
  write_file_atomic(dir / "timing.json", timing_to_json(r.timing).dump(1) + "\n");
  for (const auto& run : r.runs)
    write_file_atomic(dir / ("traj_" + std::to_string(run.index) + ".csv"), trajectory_csv(run.sim));
  write_file_atomic(dir / "graph.dot", export_dot(r.graph));
  if (opts.svg) write_file_atomic(dir / "figure.svg", render_svg(scene_from_json(result["scene"])));
}

}  // namespace stlsynth
