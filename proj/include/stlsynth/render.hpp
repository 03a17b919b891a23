#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stlsynth/scenario.hpp"

namespace stlsynth {

/// Everything drawn in the position plane.
struct Scene {
  Box workspace;
  std::vector<std::pair<std::string, Polygon>> cells;
  std::vector<Box> obstacles;
  Polygon initial_region;
  std::vector<Polygon> goals;
  /// Reference position polyline per task.
  std::vector<std::vector<Point2>> references;
  /// Projected reach-tube polygon per synthesis step.
  std::vector<Polygon> tubes;
  std::vector<std::vector<Point2>> trajectories;
};

Scene make_scene(const Scenario& s, const RunResult& r);
Json scene_to_json(const Scene& scene);
Scene scene_from_json(const Json& j);

/// Standalone SVG 1.1 document.
std::string render_svg(const Scene& scene, int width = 640);

}  // namespace stlsynth
