#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "stlsynth/sim.hpp"

namespace stlsynth {

using Json = nlohmann::json;

Json box_to_json(const Box& b);
Box box_from_json(const Json& j);
Json cz_to_json(const CZ& y);
/// Accepts {"box": ...}, {"center", "generators"[, "A", "b"]}.
CZ cz_from_json(const Json& j);
Json zonotope_to_json(const Zonotope& z);
Json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const Json& j);

/// Throws Error(Parse) naming the offending field.
Scenario scenario_from_json(const Json& j);
Json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& file);

/// Full run record without timings; deterministic for a fixed scenario.
Json result_to_json(const Scenario& s, const RunResult& r);
Json timing_to_json(const StageTiming& t);

/// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& file, const std::string& content);

/// t, x0..x{n-1}, u0..u{m-1} with 12 significant digits. The last row
/// repeats the final input.
std::string trajectory_csv(const SimResult& sim);
/// Reads the state columns (named x...) of a trajectory CSV.
stl::SampledTrajectory trajectory_from_csv(const std::string& text);

struct ArtifactOptions {
  bool svg = true;
};

/// result.json, timing.json, traj_<i>.csv, graph.dot and figure.svg.
void write_artifacts(const std::filesystem::path& dir, const Scenario& s, const RunResult& r,
                     const ArtifactOptions& opts = {});

}  // namespace stlsynth
