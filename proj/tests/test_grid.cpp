#include <gtest/gtest.h>

#include "nrf/controller.hpp"
#include "nrf/grid_example.hpp"
#include "nrf/sparse_param.hpp"
#include "support.hpp"

using namespace nrf;

namespace {

GridCoefficients random_coefficients(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 2.0);
  GridCoefficients c;
  c.Ts = 0.2;
  for (int i = 0; i < 5; ++i) {
    c.h.push_back(u(rng));
    c.damping.push_back(u(rng));
  }
  for (auto [a, b] : grid_topology()) c.lines.push_back({a, b, u(rng)});
  return c;
}

bool is_edge(int i, int j) {
  for (auto [a, b] : grid_topology())
    if ((a == i && b == j) || (a == j && b == i)) return true;
  return false;
}

}  // namespace

TEST(Grid, SamplingTimeDefault) {
  EXPECT_DOUBLE_EQ(GridCoefficients{}.Ts, 0.2);
  EXPECT_DOUBLE_EQ(surrogate_grid_coefficients().Ts, 0.2);
}

TEST(Grid, SurrogateIsLabeled) {
  const GridCoefficients c = surrogate_grid_coefficients();
  EXPECT_TRUE(c.surrogate);
  EXPECT_EQ(c.nodes(), 5);
  EXPECT_EQ(c.lines.size(), 8u);
}

TEST(Grid, BlocksFollowSwingDynamics) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const GridCoefficients c = random_coefficients(rng);
    const GridScenario g = build_grid(c);
    const double T = c.Ts;
    for (int i = 0; i < 5; ++i) {
      double sum = 0.0;
      for (int j = 0; j < 5; ++j) {
        if (j == i) continue;
        sum += c.line(i, j);
        const Matrix Aij = g.plant.A.block(2 * i, 2 * j, 2, 2);
        Matrix expected = Matrix::Zero(2, 2);
        expected(1, 0) = c.h[i] * c.line(i, j) * T;
        EXPECT_LT((Aij - expected).cwiseAbs().maxCoeff(), 1e-15);
      }
      Matrix Aii(2, 2);
      Aii << 1.0, T, -c.h[i] * T * sum, 1.0 - c.h[i] * c.damping[i] * T;
      EXPECT_TRUE(g.plant.A.block(2 * i, 2 * i, 2, 2).isApprox(Aii, 1e-14));
      EXPECT_EQ(g.plant.Bu.block(2 * i, i, 2, 1), (Matrix(2, 1) << 0, 1).finished());
    }
    EXPECT_EQ(g.plant.Bd, g.plant.Bu);
  }
}

TEST(Grid, NonEdgesGiveZeroBlocks) {
  const GridScenario g = test::surrogate_grid();
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      if (i == j) continue;
      EXPECT_EQ(g.plant.A.block(2 * i, 2 * j, 2, 2).isZero(0.0), !is_edge(i, j))
          << i + 1 << "," << j + 1;
    }
}

TEST(Grid, PartitionAndNeighborhoods) {
  const GridScenario g = test::surrogate_grid();
  ASSERT_EQ(g.partition.areas(), 5);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(g.partition.indices(Signal::x, i), (std::vector<int>{2 * i, 2 * i + 1}));
    EXPECT_EQ(g.partition.indices(Signal::u, i), (std::vector<int>{i}));
  }
  const Neighborhoods expected = {{0, 1, 2, 4}, {0, 1, 3, 4}, {0, 2, 3, 4},
                                  {1, 2, 3, 4}, {0, 1, 2, 3, 4}};
  EXPECT_EQ(g.neighborhoods, expected);
}

TEST(Grid, MissingOrNonPositiveCoefficientsRejected) {
  GridCoefficients c = surrogate_grid_coefficients();
  c.damping.pop_back();
  EXPECT_THROW(c.validate(), Error);
  c = surrogate_grid_coefficients();
  c.h[2] = 0.0;
  EXPECT_THROW(build_grid(c), Error);
  c = surrogate_grid_coefficients();
  c.lines[0].coupling = -1.0;
  try {
    c.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config);
  }
}

TEST(Grid, RowDenominatorsComeFromDiagonalFactor) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    GridScenario g = build_grid(surrogate_grid_coefficients());
    while (trial > 0) {
      g = build_grid(random_coefficients(rng));
      const Matrix Af = g.plant.A + g.plant.Bu * grid_block_diagonalizing_F(g);
      if (spectral_radius(Af) < 0.99) break;
    }
    const DcfBundle d = build_dcf(g.plant, grid_block_diagonalizing_F(g), grid_deadbeat_L(g));
    EXPECT_EQ(d.left_fir_degree, 2);
    const Matrix Ad = g.plant.A + g.plant.Bu * d.F;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        if (i != j) EXPECT_LT(Ad.block(2 * i, 2 * j, 2, 2).cwiseAbs().maxCoeff(), 1e-14);
    const SparsityPattern pat = pattern_from_neighborhoods(g.partition, g.neighborhoods);
    const QParametrization p = parametrize(d, pat, 1);
    const NrfPair pair = form_nrf_pair(d, q_from_x(p, test::random_matrix(rng, p.size(), 1)));
    for (int l = 0; l < 5; ++l) {
      const ControllerRow row = extract_row(pair.KD, l);
      const int n = static_cast<int>(row.chi.size());
      ASSERT_EQ(n, 3);
      const double y_inf = pair.Ydiag.D()(l, l);
      for (double th : {0.3, 1.7, 2.6}) {
        const Complex z = std::polar(1.0, th);
        Complex chi = std::pow(z, n);
        for (int k = 0; k < n; ++k) chi += row.chi[k] * std::pow(z, n - 1 - k);
        const Complex want = std::pow(z, n) * pair.Ydiag.eval(z)(l, l) / y_inf;
        EXPECT_LT(std::abs(chi - want), 1e-9);
      }
    }
  }
}
