#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stlsynth/geometry.hpp"

namespace stlsynth {

/// Uniform sampling lattice over a 2-D box, boundary included.
class SampleGrid {
 public:
  SampleGrid(const Box& area, double delta);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int size() const { return (nx_ + 1) * (ny_ + 1); }
  int index(int i, int j) const { return j * (nx_ + 1) + i; }
  Point2 point(int i, int j) const;
  Point2 point(int k) const { return point(k % (nx_ + 1), k / (nx_ + 1)); }
  double spacing() const { return std::max(dx_, dy_); }

  /// 4-connected components of the masked points; labels -1 where unmasked.
  std::vector<int> components(const std::vector<char>& mask, int* count) const;

 private:
  Box area_;
  int nx_, ny_;
  double dx_, dy_;
};

double default_grid_resolution(const Box& workspace);

struct RandomCenters {
  int count = 0;
  std::uint64_t seed = 0;
};

struct PartitionConfig {
  Box workspace;
  std::vector<Point2> centers;
  std::optional<RandomCenters> random;
  /// Optional explicit neighbor lists per center; empty means nearest.
  std::vector<std::vector<int>> connections;
  double eps = 0.1;
  int neighbor_count = 2;
  /// <= 0 selects the default (workspace diagonal / 200).
  double grid_resolution = 0.0;

  double resolution() const;
};

struct Partition {
  std::vector<CZ> cells;
  std::vector<std::string> labels;
  int zonotope_count = 0;
  int fill_count = 0;
};

/// Explicit centers, or seeded uniform draws over the workspace.
std::vector<Point2> resolve_centers(const PartitionConfig& cfg);

std::vector<Zonotope> generate_zonotopes(const PartitionConfig& cfg);

std::vector<CZ> fill_gaps(const Box& workspace, const std::vector<Zonotope>& zonos,
                          double grid_resolution);

Partition expand_all(const std::vector<CZ>& cells, double eps, int zonotope_count = -1);

Partition build_partition(const PartitionConfig& cfg);

/// Grid points of the workspace not covered by any cell.
std::vector<Point2> uncovered_points(const Box& workspace, const std::vector<CZ>& cells,
                                     double grid_resolution);

}  // namespace stlsynth
