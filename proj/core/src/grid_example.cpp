#include "nrf/grid_example.hpp"

#include <algorithm>

namespace nrf {

double GridCoefficients::line(int i, int j) const {
  for (const auto& l : lines)
    if ((l.a == i && l.b == j) || (l.a == j && l.b == i)) return l.coupling;
  return 0.0;
}

void GridCoefficients::validate() const {
  const int n = nodes();
  if (n < 2)
    throw Error(ErrorCode::config, "grid needs at least two nodes (field 'h')");
  if (static_cast<int>(damping.size()) != n)
    throw Error(ErrorCode::config, "grid field 'damping' must have one entry per node");
  if (!(Ts > 0.0)) throw Error(ErrorCode::config, "grid field 'Ts' must be positive");
  for (int i = 0; i < n; ++i) {
    if (!(h[i] > 0.0))
      throw Error(ErrorCode::config, "grid field 'h' must be positive");
    if (!(damping[i] > 0.0))
      throw Error(ErrorCode::config, "grid field 'damping' must be positive");
  }
  for (const auto& l : lines) {
    if (l.a < 0 || l.b < 0 || l.a >= n || l.b >= n || l.a == l.b)
      throw Error(ErrorCode::config, "grid line endpoints out of range");
    if (!(l.coupling > 0.0))
      throw Error(ErrorCode::config, "grid line coefficients must be positive");
  }
}

std::vector<std::pair<int, int>> grid_topology() {
  return {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {0, 4}, {1, 4}, {2, 4}, {3, 4}};
}

GridCoefficients surrogate_grid_coefficients() {
  GridCoefficients c;
  c.Ts = 0.2;
  c.h = {0.8, 0.9, 1.0, 0.85, 0.75};
  c.damping = {2.0, 2.2, 1.8, 2.1, 2.4};
  const std::vector<double> ell = {1.2, 1.5, 1.1, 1.3, 1.0, 1.4, 0.9, 1.6};
  const auto topo = grid_topology();
  for (size_t k = 0; k < topo.size(); ++k)
    c.lines.push_back({topo[k].first, topo[k].second, ell[k]});
  c.surrogate = true;
  c.source = "surrogate";
  return c;
}

Neighborhoods grid_neighborhoods(const GridCoefficients& c) {
  const int n = c.nodes();
  Neighborhoods nb(n);
  for (int i = 0; i < n; ++i) {
    nb[i].push_back(i);
    for (const auto& l : c.lines) {
      if (l.a == i) nb[i].push_back(l.b);
      if (l.b == i) nb[i].push_back(l.a);
    }
    std::sort(nb[i].begin(), nb[i].end());
    nb[i].erase(std::unique(nb[i].begin(), nb[i].end()), nb[i].end());
  }
  return nb;
}

GridScenario build_grid(const GridCoefficients& c) {
  c.validate();
  const int n = c.nodes();
  const double T = c.Ts;
  GridScenario g;
  g.coeffs = c;
  Matrix A = Matrix::Zero(2 * n, 2 * n), B = Matrix::Zero(2 * n, n);
  for (int i = 0; i < n; ++i) {
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double l = c.line(i, j);
      total += l;
      A(2 * i + 1, 2 * j) = c.h[i] * l * T;
    }
    A(2 * i, 2 * i) = 1.0;
    A(2 * i, 2 * i + 1) = T;
    A(2 * i + 1, 2 * i) = -c.h[i] * T * total;
    A(2 * i + 1, 2 * i + 1) = 1.0 - c.h[i] * c.damping[i] * T;
    B(2 * i + 1, i) = 1.0;
  }
  g.plant = Plant{A, B, B};
  std::vector<std::pair<int, int>> sizes(n, {2, 1});
  g.partition = AreaPartition::build(sizes);
  g.neighborhoods = grid_neighborhoods(c);
  return g;
}

Matrix grid_block_diagonalizing_F(const GridScenario& g) {
  const Matrix& A = g.plant.A;
  const Matrix& B = g.plant.Bu;
  Matrix Ad = Matrix::Zero(A.rows(), A.cols());
  for (int i = 0; i < g.partition.areas(); ++i) {
    const int o = g.partition.offset(Signal::x, i), s = g.partition.size(Signal::x, i);
    Ad.block(o, o, s, s) = A.block(o, o, s, s);
  }
  return (B.transpose() * B).ldlt().solve(B.transpose() * (Ad - A));
}

Matrix grid_deadbeat_L(const GridScenario& g) {
  const double T = g.coeffs.Ts;
  Matrix Adb(2, 2);
  Adb << 1.0, T, -1.0 / T, -1.0;
  Matrix D = Matrix::Zero(g.plant.nx(), g.plant.nx());
  for (int i = 0; i < g.partition.areas(); ++i) D.block(2 * i, 2 * i, 2, 2) = Adb;
  return D - g.plant.A;
}

}  // namespace nrf
