// Command-line front end: run, partition, graph, monitor, replay.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "stlsynth/error.hpp"
#include "stlsynth/render.hpp"
#include "stlsynth/scenario.hpp"

using namespace stlsynth;

namespace {

constexpr int kOk = 0;
constexpr int kIoError = 1;
constexpr int kNoSolution = 2;
constexpr int kViolated = 3;

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::NoPath:
    case ErrorKind::Infeasible:
    case ErrorKind::WindowConflict:
      return kNoSolution;
    default:
      return kIoError;
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int thread_count() {
  if (const char* env = std::getenv("STLSYNTH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 0;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> eps;
  std::optional<int> steps;
  std::optional<std::string> eval_mode;
  std::optional<int> seeds_count;

  void apply(Scenario& s) const {
    if (seed) s.seed = *seed;
    if (eps) s.partition.eps = *eps;
    if (steps) s.synthesis.steps_per_task = *steps;
    if (eval_mode) s.eval_mode = parse_eval_mode(*eval_mode);
    if (seeds_count) s.realizations = *seeds_count;
  }
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Disturbance seed");
  cmd->add_option("--eps", o.eps, "Cell expansion factor");
  cmd->add_option("--steps-per-task", o.steps, "Synthesis steps per local task");
  cmd->add_option("--eval-mode", o.eval_mode, "volume or admissible-volume");
  cmd->add_option("--seeds-count", o.seeds_count, "Number of disturbance realizations");
}

int cmd_run(const std::string& scenario, const std::string& out, const Overrides& ov, bool no_svg) {
  Scenario s = load_scenario(scenario);
  ov.apply(s);
  const RunResult r = run_pipeline(s, thread_count());
  ArtifactOptions ao;
  ao.svg = !no_svg;
  write_artifacts(out, s, r, ao);
  const auto& path = r.paths[r.chosen_path];
  std::cout << "path:";
  for (const auto& l : path.labels) std::cout << ' ' << l;
  std::cout << "\n";
  for (const auto& run : r.runs) {
    std::cout << "seed " << run.index << ": " << (run.verdict.satisfied ? "satisfied" : "violated");
    if (!run.verdict.satisfied && run.verdict.witness) std::cout << " at t=" << *run.verdict.witness;
    std::cout << "\n";
  }
  std::cout << (r.all_satisfied ? "all satisfied" : "specification violated") << "\n";
  return r.all_satisfied ? kOk : kViolated;
}

int cmd_partition(const std::string& scenario, const std::optional<double>& eps) {
  Scenario s = load_scenario(scenario);
  if (eps) s.partition.eps = *eps;
  const Partition p = build_partition(s.partition);
  Json cells = Json::array();
  for (std::size_t i = 0; i < p.cells.size(); ++i) {
    Json verts = Json::array();
    for (const auto& v : vertices_2d(p.cells[i])) verts.push_back({v.x(), v.y()});
    cells.push_back({{"label", p.labels[i]}, {"vertices", verts}});
  }
  const Json j = {{"zonotope_count", p.zonotope_count}, {"fill_count", p.fill_count}, {"cells", cells}};
  std::cout << j.dump(1) << "\n";
  return kOk;
}

int cmd_graph(const std::string& scenario, bool paths) {
  const Scenario s = load_scenario(scenario);
  s.validate();
  const Partition p = build_partition(s.partition);
  const auto regions = s.region_table();
  const auto f = stl::rewrite_until(stl::parse(s.formula, &regions), s.until_split);
  const auto targets = order_targets(stl::induced_ltl_targets(f, regions).targets);
  std::vector<NamedRegion> extras = {{"pi0", CZ(s.initial_region)}};
  std::vector<std::string> accepting = {"pi0"};
  for (const auto& t : targets) {
    extras.push_back({t.name, t.region});
    accepting.push_back(t.name);
  }
  const CellGraph g = build_graph(p, s.obstacles, extras, s.workspace(), s.partition.resolution());
  std::cout << export_dot(g);
  if (paths) {
    for (const auto& path : admissible_paths(g, accepting, s.max_paths)) {
      std::cerr << "path:";
      for (const auto& l : path.labels) std::cerr << ' ' << l;
      std::cerr << "\n";
    }
  }
  return kOk;
}

int cmd_monitor(const std::string& trajectory, const std::string& scenario, std::string formula) {
  stl::RegionTable regions;
  if (!scenario.empty()) {
    const Scenario s = load_scenario(scenario);
    regions = s.region_table();
    if (formula.empty()) formula = s.formula;
  }
  if (formula.empty()) throw Error(ErrorKind::InvalidArgument, "no formula given");
  const auto f = stl::parse(formula, &regions);
  const auto tr = trajectory_from_csv(read_text(trajectory));
  const auto res = stl::monitor(f, tr, regions);
  std::cout << (res.satisfied ? "satisfied" : "violated");
  if (res.witness) std::cout << " witness t=" << *res.witness;
  std::cout << "\n";
  return res.satisfied ? kOk : kViolated;
}

int cmd_replay(const std::string& result, std::string out) {
  Json j;
  try {
    j = Json::parse(read_text(result));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, result + ": " + e.what());
  }
  if (!j.contains("scene")) throw Error(ErrorKind::Parse, result + ": no scene section");
  if (out.empty()) out = (std::filesystem::path(result).parent_path() / "figure.svg").string();
  write_file_atomic(out, render_svg(scene_from_json(j["scene"])));
  std::cout << out << "\n";
  return j.value("satisfied", false) ? kOk : kViolated;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reach-tube control synthesis from signal temporal logic specifications"};
  app.require_subcommand(1);

  std::string scenario, out = "results";
  Overrides ov;
  bool no_svg = false;
  auto* run = app.add_subcommand("run", "Run the full pipeline and write the results directory");
  run->add_option("--scenario", scenario, "Scenario JSON file")->required();
  run->add_option("--out", out, "Results directory");
  run->add_flag("--no-svg", no_svg, "Skip figure.svg");
  add_overrides(run, ov);

  std::optional<double> part_eps;
  auto* part = app.add_subcommand("partition", "Print the state-space partition as JSON");
  part->add_option("--scenario", scenario, "Scenario JSON file")->required();
  part->add_option("--eps", part_eps, "Cell expansion factor");

  bool show_paths = false;
  auto* graph = app.add_subcommand("graph", "Print the cell graph in DOT format");
  graph->add_option("--scenario", scenario, "Scenario JSON file")->required();
  graph->add_flag("--paths", show_paths, "List admissible paths on stderr");

  std::string trajectory, formula;
  auto* mon = app.add_subcommand("monitor", "Check a trajectory CSV against a formula");
  mon->add_option("--trajectory", trajectory, "CSV with t and x columns")->required();
  mon->add_option("--scenario", scenario, "Scenario providing regions and the default formula");
  mon->add_option("--formula", formula, "Formula text");

  std::string result, svg_out;
  auto* replay = app.add_subcommand("replay", "Re-render figure.svg from a result.json");
  replay->add_option("--result", result, "result.json of an earlier run")->required();
  replay->add_option("--out", svg_out, "Output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kIoError;
  }

  try {
    if (*run) return cmd_run(scenario, out, ov, no_svg);
    if (*part) return cmd_partition(scenario, part_eps);
    if (*graph) return cmd_graph(scenario, show_paths);
    if (*mon) return cmd_monitor(trajectory, scenario, formula);
    if (*replay) return cmd_replay(result, svg_out);
  } catch (const Error& e) {
    std::cerr << "error";
    if (!e.stage().empty()) std::cerr << " [" << e.stage() << "]";
    std::cerr << " (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kIoError;
}
