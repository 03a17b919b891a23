#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stlsynth/partition.hpp"

namespace stlsynth {

struct NamedRegion {
  std::string label;
  CZ set;
};

struct CellGraph {
  /// Partition cells first, then the extra regions.
  std::vector<std::string> labels;
  std::vector<CZ> sets;
  int cell_count = 0;
  std::vector<std::vector<int>> adjacency;
  /// Keyed by (i, j) with i < j.
  std::map<std::pair<int, int>, CZ> intersections;
  /// Cells whose obstacle-free part is empty or split in several pieces.
  std::vector<char> blocked;

  int size() const { return static_cast<int>(labels.size()); }
  int index_of(const std::string& label) const;  // -1 when absent
  bool is_cell(int v) const { return v < cell_count; }
  bool edge(int i, int j) const { return adjacency[i][j] != 0; }
  const CZ& intersection(int i, int j) const;
  int edge_count() const;
};

/// Adjacency over partition cells plus extra regions. An edge needs a
/// non-empty overlap whose obstacle-free part inside the workspace is
/// connected on the sampling grid. Extras only link to cells.
CellGraph build_graph(const Partition& p, const std::vector<Box>& obstacles,
                      const std::vector<NamedRegion>& extras, const Box& workspace,
                      double grid_resolution);

/// Whether region minus obstacles, clipped to the workspace, is non-empty and
/// 4-connected on the grid.
bool admissible_region(const CZ& region, const std::vector<Box>& obstacles,
                       const Box& workspace, double grid_resolution);

struct Path {
  /// Full vertex walk including extra regions.
  std::vector<int> vertices;
  /// Cell indices only, consecutive repeats merged.
  std::vector<int> cells;
  std::vector<std::string> labels;
  /// For each accepting target after the first, the position in `cells`
  /// of the cell through which it is reached.
  std::vector<int> goal_positions;
};

/// Concatenations of simple sub-paths linking consecutive accepting labels,
/// in DFS order with lexicographic neighbor order.
std::vector<Path> admissible_paths(const CellGraph& g, const std::vector<std::string>& accepting,
                                   int max_paths = 64);

std::string export_dot(const CellGraph& g);

}  // namespace stlsynth
