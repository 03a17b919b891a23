#include "stlsynth/render.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "stlsynth/error.hpp"

namespace stlsynth {

namespace {

Json points_json(const std::vector<Point2>& pts) {
  Json a = Json::array();
  for (const auto& p : pts) a.push_back({p.x(), p.y()});
  return a;
}

std::vector<Point2> points_from(const Json& j) {
  std::vector<Point2> out;
  if (!j.is_array()) throw Error(ErrorKind::Parse, "scene: expected a point list");
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) throw Error(ErrorKind::Parse, "scene: points are pairs");
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

Polygon box_outline(const Box& b) { return box_polygon(b); }

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

Scene make_scene(const Scenario& s, const RunResult& r) {
  Scene sc;
  sc.workspace = s.workspace();
  for (std::size_t i = 0; i < r.partition.cells.size(); ++i)
    sc.cells.emplace_back(r.partition.labels[i], vertices_2d(r.partition.cells[i]));
  sc.obstacles = s.obstacles;
  sc.initial_region = box_outline(s.initial_region);
  const Polygon ws = box_polygon(sc.workspace);
  for (int v = r.graph.cell_count; v < r.graph.size(); ++v) {
    if (r.graph.labels[v] == "pi0") continue;
    sc.goals.push_back(clip_convex(vertices_2d(r.graph.sets[v]), ws));
  }
  const MatrixXd proj = projection_matrix(s.position, s.system.nx());
  for (const auto& tp : r.plan.tasks) {
    std::vector<Point2> ref;
    for (const auto& x : tp.center_states) ref.push_back(proj * x);
    sc.references.push_back(std::move(ref));
    for (const auto& tube : tp.tubes) sc.tubes.push_back(vertices_2d(linear_map(proj, tube)));
  }
  for (const auto& run : r.runs) {
    std::vector<Point2> path;
    for (const auto& x : run.sim.trajectory.states) path.push_back(proj * x);
    sc.trajectories.push_back(std::move(path));
  }
  return sc;
}

Json scene_to_json(const Scene& sc) {
  Json cells = Json::array();
  for (const auto& [label, poly] : sc.cells) cells.push_back({{"label", label}, {"polygon", points_json(poly)}});
  Json obstacles = Json::array();
  for (const auto& o : sc.obstacles) obstacles.push_back(box_to_json(o));
  Json goals = Json::array();
  for (const auto& g : sc.goals) goals.push_back(points_json(g));
  Json refs = Json::array();
  for (const auto& p : sc.references) refs.push_back(points_json(p));
  Json tubes = Json::array();
  for (const auto& t : sc.tubes) tubes.push_back(points_json(t));
  Json trajs = Json::array();
  for (const auto& t : sc.trajectories) trajs.push_back(points_json(t));
  return {{"workspace", box_to_json(sc.workspace)},
          {"cells", cells},
          {"obstacles", obstacles},
          {"initial_region", points_json(sc.initial_region)},
          {"goals", goals},
          {"references", refs},
          {"tubes", tubes},
          {"trajectories", trajs}};
}

Scene scene_from_json(const Json& j) {
  Scene sc;
  try {
    sc.workspace = box_from_json(j.at("workspace"));
    for (const auto& c : j.at("cells"))
      sc.cells.emplace_back(c.at("label").get<std::string>(), points_from(c.at("polygon")));
    for (const auto& o : j.at("obstacles")) sc.obstacles.push_back(box_from_json(o));
    sc.initial_region = points_from(j.at("initial_region"));
    for (const auto& g : j.at("goals")) sc.goals.push_back(points_from(g));
    for (const auto& p : j.at("references")) sc.references.push_back(points_from(p));
    for (const auto& t : j.at("tubes")) sc.tubes.push_back(points_from(t));
    for (const auto& t : j.at("trajectories")) sc.trajectories.push_back(points_from(t));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("scene: ") + e.what());
  }
  if (sc.workspace.dim() != 2) throw Error(ErrorKind::Parse, "scene: workspace must be 2-D");
  return sc;
}

std::string render_svg(const Scene& sc, int width) {
  const double w = sc.workspace.upper(0) - sc.workspace.lower(0);
  const double h = sc.workspace.upper(1) - sc.workspace.lower(1);
  if (!(w > 0.0 && h > 0.0)) throw Error(ErrorKind::InvalidArgument, "scene workspace is flat");
  const double pad = 10.0;
  const double scale = (width - 2 * pad) / w;
  const int height = static_cast<int>(std::lround(h * scale + 2 * pad));
  char buf[64];
  auto X = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.2f", pad + (x - sc.workspace.lower(0)) * scale);
    return std::string(buf);
  };
  auto Y = [&](double y) {
    std::snprintf(buf, sizeof buf, "%.2f", pad + (sc.workspace.upper(1) - y) * scale);
    return std::string(buf);
  };
  auto pts = [&](const std::vector<Point2>& ps) {
    std::string out;
    for (const auto& p : ps) {
      if (!out.empty()) out += ' ';
      out += X(p.x()) + "," + Y(p.y());
    }
    return out;
  };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<g fill=\"#9a9a9a\" fill-opacity=\"0.35\" stroke=\"none\">\n";
  for (const auto& t : sc.tubes)
    if (t.size() >= 3) os << "<polygon points=\"" << pts(t) << "\"/>\n";
  os << "</g>\n<g fill=\"none\" stroke=\"#707070\" stroke-width=\"1\">\n";
  for (const auto& [label, poly] : sc.cells)
    if (poly.size() >= 2) os << "<polygon points=\"" << pts(poly) << "\"><title>" << escape(label) << "</title></polygon>\n";
  os << "</g>\n<g fill=\"#3a3a3a\">\n";
  for (const auto& o : sc.obstacles) os << "<polygon points=\"" << pts(box_polygon(o)) << "\"/>\n";
  os << "</g>\n<g fill=\"#2f6fd0\" fill-opacity=\"0.6\">\n";
  if (sc.initial_region.size() >= 3) os << "<polygon points=\"" << pts(sc.initial_region) << "\"/>\n";
  os << "</g>\n<g fill=\"#d03a3a\" fill-opacity=\"0.6\">\n";
  for (const auto& g : sc.goals)
    if (g.size() >= 3) os << "<polygon points=\"" << pts(g) << "\"/>\n";
  os << "</g>\n<g fill=\"none\" stroke=\"#8e44ad\" stroke-width=\"2\">\n";
  for (const auto& r : sc.references) os << "<polyline points=\"" << pts(r) << "\"/>\n";
  os << "</g>\n<g fill=\"none\" stroke=\"black\" stroke-width=\"1\">\n";
  for (const auto& t : sc.trajectories) os << "<polyline points=\"" << pts(t) << "\"/>\n";
  os << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#505050\" text-anchor=\"middle\">\n";
  for (const auto& [label, poly] : sc.cells) {
    if (poly.empty()) continue;
    Point2 c = Point2::Zero();
    for (const auto& p : poly) c += p;
    c /= static_cast<double>(poly.size());
    os << "<text x=\"" << X(c.x()) << "\" y=\"" << Y(c.y()) << "\">" << escape(label) << "</text>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace stlsynth
