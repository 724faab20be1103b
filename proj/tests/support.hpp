#pragma once

#include <random>

#include <Eigen/Dense>

#include "nrf/dcf.hpp"
#include "nrf/grid_example.hpp"
#include "nrf/lti.hpp"
#include "nrf/partition.hpp"

namespace nrf::test {

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double a = 1.0) {
  std::uniform_real_distribution<double> u(-a, a);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = u(rng);
  return m;
}

inline int random_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// State matrix rescaled so its spectral radius is `radius`.
inline Realization random_stable(std::mt19937_64& rng, int n, int p, int m,
                                 double radius = 0.8) {
  Matrix A = random_matrix(rng, n, n);
  if (n > 0) {
    const double rho = A.eigenvalues().cwiseAbs().maxCoeff();
    if (rho > 0.0) A *= radius / rho;
  }
  return Realization(A, random_matrix(rng, n, m), random_matrix(rng, p, n),
                     random_matrix(rng, p, m));
}

/// C (zI - A)^{-1} B + D by a dense complex solve.
inline CMatrix dense_eval(const Realization& r, Complex z) {
  const int n = r.order();
  CMatrix out = r.D().cast<Complex>();
  if (n == 0) return out;
  const CMatrix pencil = z * CMatrix::Identity(n, n) - r.A().cast<Complex>();
  out += r.C().cast<Complex>() * pencil.fullPivLu().solve(r.B().cast<Complex>());
  return out;
}

inline Complex on_circle(double theta) { return std::polar(1.0, theta); }

/// Random plant; A has entries of order one so it is usually unstable.
inline Plant random_plant(std::mt19937_64& rng, int nx, int nu, int nd) {
  Plant p;
  p.A = random_matrix(rng, nx, nx);
  p.Bu = random_matrix(rng, nx, nu);
  p.Bd = random_matrix(rng, nx, nd);
  return p;
}

/// Splits nx states and nu inputs into N contiguous areas, each with at least
/// one of both.
inline AreaPartition random_partition(std::mt19937_64& rng, int nx, int nu, int N) {
  auto split = [&](int total) {
    std::vector<int> s(N, 1);
    for (int k = N; k < total; ++k) ++s[random_int(rng, 0, N - 1)];
    return s;
  };
  const std::vector<int> sx = split(nx), su = split(nu);
  std::vector<std::pair<int, int>> sizes;
  for (int i = 0; i < N; ++i) sizes.emplace_back(sx[i], su[i]);
  return AreaPartition::build(sizes);
}

/// Two decoupled scalar integrators x_i+ = 1.2 x_i + u_i + d_i.
inline Plant scalar_pair_plant() {
  Plant p;
  p.A = Matrix::Identity(2, 2) * 1.2;
  p.Bu = Matrix::Identity(2, 2);
  p.Bd = Matrix::Identity(2, 2);
  return p;
}

inline AreaPartition scalar_pair_partition() { return AreaPartition::build({{1, 1}, {1, 1}}); }

inline GridScenario surrogate_grid() { return build_grid(surrogate_grid_coefficients()); }

}  // namespace nrf::test
