#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nrf/dcf.hpp"
#include "nrf/partition.hpp"

namespace nrf {

struct GridLine {
  int a = 0;  // 0-based node indices
  int b = 0;
  double coupling = 0.0;
};

/// Coefficients of the five-node swing-dynamics grid.
struct GridCoefficients {
  double Ts = 0.2;
  std::vector<double> h;        // per-node inertia-type gain
  std::vector<double> damping;  // per-node damping d_i
  std::vector<GridLine> lines;
  bool surrogate = false;
  std::string source;

  int nodes() const { return static_cast<int>(h.size()); }
  double line(int i, int j) const;
  void validate() const;
};

/// Placeholder coefficient set shipped with the tool. Not the published one.
GridCoefficients surrogate_grid_coefficients();

/// Topology of the five-node mesh: lines 1-2, 1-3, 2-4, 3-4 and node 5
/// connected to every other node.
std::vector<std::pair<int, int>> grid_topology();

struct GridScenario {
  GridCoefficients coeffs;
  Plant plant;
  AreaPartition partition;
  Neighborhoods neighborhoods;
};

/// One area per node; area i holds states (2i-1, 2i) and input i.
GridScenario build_grid(const GridCoefficients& c);

/// Neighborhood of each area: itself plus every adjacent node.
Neighborhoods grid_neighborhoods(const GridCoefficients& c);

/// F = (B'B)^{-1} B' (diag(A_ii) - A).
Matrix grid_block_diagonalizing_F(const GridScenario& g);
/// L = diag(A_db, ..., A_db) - A with A_db = [[1, Ts], [-1/Ts, -1]].
Matrix grid_deadbeat_L(const GridScenario& g);

}  // namespace nrf
