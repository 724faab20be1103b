#include <gtest/gtest.h>

#include "nrf/controller.hpp"
#include "nrf/sparse_param.hpp"
#include "support.hpp"

using namespace nrf;
using nrf::test::dense_eval;
using nrf::test::on_circle;

namespace {

DcfBundle scalar_pair_dcf() {
  const Plant p = test::scalar_pair_plant();
  return build_dcf(p, -p.A, deadbeat_observer_gain(p, test::scalar_pair_partition()));
}

Realization random_fir(std::mt19937_64& rng, int rows, int cols, int q, double a) {
  std::vector<Matrix> taps;
  for (int t = 0; t < q; ++t) taps.push_back(test::random_matrix(rng, rows, cols, a));
  return fir_realization(taps);
}

std::vector<Complex> poly_from_roots(const std::vector<Complex>& roots) {
  std::vector<Complex> p{1.0};
  for (const Complex& r : roots) {
    std::vector<Complex> next(p.size() + 1, 0.0);
    for (size_t k = 0; k < p.size(); ++k) {
      next[k] += p[k];
      next[k + 1] -= r * p[k];
    }
    p = next;
  }
  return p;
}

struct SparseGridDesign {
  DcfBundle d;
  SparsityPattern pat;
  NrfPair pair;
  GridScenario g;
};

SparseGridDesign sparse_grid_design(std::uint64_t seed) {
  SparseGridDesign s;
  s.g = test::surrogate_grid();
  s.d = build_dcf(s.g.plant, grid_block_diagonalizing_F(s.g), grid_deadbeat_L(s.g));
  s.pat = pattern_from_neighborhoods(s.g.partition, s.g.neighborhoods);
  const QParametrization p = parametrize(s.d, s.pat, 1);
  std::mt19937_64 rng(seed);
  s.pair = form_nrf_pair(s.d, q_from_x(p, test::random_matrix(rng, p.size(), 1, 0.5)));
  return s;
}

}  // namespace

TEST(NrfPair, RecoversTheYoulaController) {
  const DcfBundle d = scalar_pair_dcf();
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Realization Q = random_fir(rng, 2, 2, 2, 0.4);
    const NrfPair p = form_nrf_pair(d, Q);
    for (double th : {0.3, 1.7, 2.8}) {
      const Complex z = on_circle(th);
      const CMatrix Yq = dense_eval(d.Yt, z) + dense_eval(Q, z) * dense_eval(d.Nt, z);
      const CMatrix Xq = dense_eval(d.Xt, z) + dense_eval(Q, z) * dense_eval(d.Mt, z);
      const CMatrix K = Yq.inverse() * Xq;
      const CMatrix Phi = dense_eval(p.Phi, z), Gamma = dense_eval(p.Gamma, z);
      EXPECT_NEAR(std::abs(Phi(0, 0)), 0.0, 1e-12);
      EXPECT_NEAR(std::abs(Phi(1, 1)), 0.0, 1e-12);
      const CMatrix Kd = (CMatrix::Identity(2, 2) - Phi).inverse() * Gamma;
      EXPECT_LT((Kd - K).norm(), 1e-9 * (1.0 + K.norm()));
      CMatrix kd(2, 4);
      kd << Phi, Gamma;
      EXPECT_LT((dense_eval(p.KD, z) - kd).norm(), 1e-9);
    }
  }
}

TEST(NrfPair, RejectsBadParameters) {
  const DcfBundle d = scalar_pair_dcf();
  try {
    form_nrf_pair(d, Realization::gain(Matrix::Identity(2, 2)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_strictly_proper);
  }
  EXPECT_THROW(form_nrf_pair(d, Realization::zero(2, 3)), Error);
  const Realization unstable(Matrix::Constant(1, 1, 1.1), Matrix::Ones(1, 2),
                             Matrix::Ones(2, 1), Matrix::Zero(2, 2));
  EXPECT_THROW(form_nrf_pair(d, unstable), Error);
}

TEST(ControllerRow, CanonicalFormMatchesRowAndIsMinimal) {
  const DcfBundle d = scalar_pair_dcf();
  std::mt19937_64 rng(9);
  const FrequencyGrid grid = FrequencyGrid::chebyshev(64);
  for (int trial = 0; trial < 10; ++trial) {
    const NrfPair p = form_nrf_pair(d, random_fir(rng, 2, 2, 3, 0.3));
    for (int l = 0; l < 2; ++l) {
      const ControllerRow row = extract_row(p.KD, l);
      const Realization kd_row = row_block(p.KD, l, 1);
      for (const Complex& z : grid.points) {
        const CMatrix want = dense_eval(kd_row, z);
        EXPECT_LT((row.canonical.eval(z) - want).norm(), 1e-8 * std::max(1.0, want.norm()));
      }
      EXPECT_TRUE(is_minimal(row.canonical));
      EXPECT_EQ(row.canonical.C(), Matrix(Vector::Unit(row.order(), 0).transpose()));
      const std::vector<Complex> expected = poly_from_roots(eigenvalues(minimal(kd_row).A()));
      ASSERT_EQ(row.chi.size() + 1, expected.size());
      for (size_t k = 0; k < row.chi.size(); ++k)
        EXPECT_NEAR(row.chi[k], expected[k + 1].real(), 1e-8);
      EXPECT_NO_THROW(verify_sparsity_inheritance(row, p.KD));
    }
  }
}

TEST(ControllerRow, StructuralZerosHaveExactZeroColumns) {
  const SparseGridDesign s = sparse_grid_design(3);
  for (int l = 0; l < s.pat.nu(); ++l) {
    const ControllerRow row = extract_row(s.pair.KD, l);
    for (int c = 0; c < s.pat.mask.cols(); ++c) {
      if (s.pat.mask(l, c) != 0 && c != l) continue;
      EXPECT_TRUE(row.canonical.B().col(c).isZero(0.0)) << l << "," << c;
      EXPECT_EQ(row.canonical.D()(0, c), 0.0);
    }
    EXPECT_NO_THROW(verify_sparsity_inheritance(row, s.pair.KD));
  }
}

TEST(ControllerRow, InheritanceViolationReportsEntry) {
  const SparseGridDesign s = sparse_grid_design(5);
  ControllerRow row = extract_row(s.pair.KD, 0);
  ASSERT_FALSE(row.zero_cols.empty());
  const int c = row.zero_cols.back();
  Matrix B = row.canonical.B();
  B.col(c).setConstant(1.0);
  row.canonical = Realization(row.canonical.A(), B, row.canonical.C(), row.canonical.D());
  try {
    verify_sparsity_inheritance(row, s.pair.KD);
    FAIL();
  } catch (const ViolationError& e) {
    EXPECT_EQ(e.code(), ErrorCode::inheritance_violation);
    EXPECT_EQ(e.pairs().front(), std::make_pair(1, c + 1));
  }
}

TEST(Bank, StackedBankEqualsDistributedRealization) {
  const SparseGridDesign s = sparse_grid_design(7);
  const std::vector<AreaController> bank = build_bank(s.pair.KD, s.g.partition);
  ASSERT_EQ(bank.size(), 5u);
  const Realization w = bank_realization(bank);
  EXPECT_LT(max_deviation(w, s.pair.KD, FrequencyGrid::chebyshev(64)), 1e-9);
  const AreaPartition pw = partition_with_bank(s.g.partition, bank);
  EXPECT_EQ(pw.total(Signal::w), w.order());
  EXPECT_NO_THROW(check_comm_constraints(bank, s.g.partition, s.g.neighborhoods));
}

TEST(Bank, KdColumnsOfArea) {
  const AreaPartition p = AreaPartition::build({{2, 1}, {1, 2}});
  EXPECT_EQ(kd_columns_of_area(p, 0), (std::vector<int>{0, 3, 4}));
  EXPECT_EQ(kd_columns_of_area(p, 1), (std::vector<int>{1, 2, 5}));
}

TEST(Bank, CommunicationViolationListsPairs) {
  const DcfBundle d = scalar_pair_dcf();
  std::mt19937_64 rng(1);
  const NrfPair p = form_nrf_pair(d, random_fir(rng, 2, 2, 1, 0.5));
  const std::vector<AreaController> bank = build_bank(p.KD, test::scalar_pair_partition());
  EXPECT_NO_THROW(check_comm_constraints(bank, test::scalar_pair_partition(),
                                         full_neighborhoods(2)));
  try {
    check_comm_constraints(bank, test::scalar_pair_partition(), {{0}, {1}});
    FAIL();
  } catch (const ViolationError& e) {
    EXPECT_EQ(e.code(), ErrorCode::comm_violation);
    EXPECT_EQ(e.pairs(), (std::vector<std::pair<int, int>>{{1, 2}, {2, 1}}));
  }
}
