#include <gtest/gtest.h>

#include "nrf/dcf.hpp"
#include "support.hpp"

using namespace nrf;
using nrf::test::dense_eval;
using nrf::test::on_circle;

namespace {

CMatrix plant_tf(const Plant& p, Complex z) {
  const int n = p.nx();
  const CMatrix pencil = z * CMatrix::Identity(n, n) - p.A.cast<Complex>();
  return pencil.fullPivLu().solve(p.Bu.cast<Complex>());
}

DcfBundle lqr_dcf(const Plant& p, const AreaPartition& part) {
  const Gains g = design_gains(p, part, GainStrategy::lqr_F_deadbeat_L);
  return build_dcf(p, g.F, g.L);
}

}  // namespace

TEST(Plant, ValidateCatchesShapeErrors) {
  Plant p;
  p.A = Matrix::Zero(2, 2);
  p.Bu = Matrix::Zero(3, 1);
  p.Bd = Matrix::Zero(2, 1);
  EXPECT_THROW(p.validate(), Error);
}

TEST(Dcf, FactorsReproducePlantAndCentralController) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 15; ++trial) {
    const int nx = test::random_int(rng, 2, 8), nu = test::random_int(rng, 2, 4);
    const Plant p = test::random_plant(rng, nx, nu, 1);
    const AreaPartition part = test::random_partition(rng, nx, nu, 2);
    const DcfBundle d = lqr_dcf(p, part);
    EXPECT_LE(d.bezout_residual, kBezoutTol);
    for (double th : {0.2, 1.1, 2.5}) {
      const Complex z = on_circle(th);
      const CMatrix G = plant_tf(p, z);
      const CMatrix right = dense_eval(d.N, z) * dense_eval(d.M, z).inverse();
      const CMatrix left = dense_eval(d.Mt, z).inverse() * dense_eval(d.Nt, z);
      EXPECT_LT((right - G).norm(), 1e-8 * (1.0 + G.norm())) << trial;
      EXPECT_LT((left - G).norm(), 1e-8 * (1.0 + G.norm())) << trial;
      const CMatrix Kl = dense_eval(d.Yt, z).inverse() * dense_eval(d.Xt, z);
      const CMatrix Kr = dense_eval(d.X, z) * dense_eval(d.Y, z).inverse();
      EXPECT_LT((Kl - Kr).norm(), 1e-8 * (1.0 + Kl.norm())) << trial;
    }
  }
}

TEST(Dcf, FeedthroughNormalization) {
  std::mt19937_64 rng(2);
  const Plant p = test::random_plant(rng, 4, 2, 1);
  const DcfBundle d = lqr_dcf(p, AreaPartition::build({{2, 1}, {2, 1}}));
  EXPECT_TRUE(d.Yt.D().isIdentity(0.0));
  EXPECT_TRUE(d.Xt.D().isZero(0.0));
  EXPECT_TRUE(d.N.D().isZero(0.0));
  EXPECT_TRUE(d.Nt.D().isZero(0.0));
}

TEST(Dcf, DeadbeatObserverMakesLeftFactorsFir) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int nx = test::random_int(rng, 2, 9), nu = test::random_int(rng, 2, 4);
    const Plant p = test::random_plant(rng, nx, nu, 2);
    const AreaPartition part = test::random_partition(rng, nx, nu, 2);
    const DcfBundle d = lqr_dcf(p, part);
    ASSERT_TRUE(d.left_fir_degree.has_value());
    EXPECT_LE(*d.left_fir_degree, nx);
    const Matrix Al = p.A + d.L;
    Matrix P = Matrix::Identity(nx, nx);
    for (int k = 0; k < *d.left_fir_degree; ++k) P = P * Al;
    EXPECT_LT(P.norm(), 1e-8 * std::pow(1.0 + Al.norm(), *d.left_fir_degree));
    for (int i = 0; i < part.areas(); ++i) {
      const int o = part.offset(Signal::x, i), s = part.size(Signal::x, i);
      Matrix off = Al.block(o, 0, s, nx);
      off.middleCols(o, s).setZero();
      EXPECT_EQ(off.cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(Dcf, NilpotencyIndex) {
  Matrix J = Matrix::Zero(3, 3);
  J(0, 1) = 1.0;
  J(1, 2) = 1.0;
  EXPECT_EQ(nilpotency_index(J), 3);
  EXPECT_EQ(nilpotency_index(Matrix::Zero(2, 2)), 1);
  EXPECT_FALSE(nilpotency_index(Matrix::Identity(2, 2) * 0.5).has_value());
}

TEST(Dcf, NonStabilizingGainsRejected) {
  const Plant p = test::scalar_pair_plant();
  try {
    build_dcf(p, Matrix::Zero(2, 2), -p.A);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_stabilizing);
  }
}

TEST(Dcf, UncontrollableUnstableModeRejected) {
  Plant p;
  p.A = Matrix::Identity(2, 2) * 1.5;
  p.Bu = Matrix::Zero(2, 2);
  p.Bu(0, 0) = 1.0;
  p.Bd = Matrix::Identity(2, 2);
  try {
    design_gains(p, AreaPartition::build({{1, 1}, {1, 1}}), GainStrategy::lqr_F_deadbeat_L);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::uncontrollable_mode);
  }
}

TEST(Dcf, UserGainsChecked) {
  const Plant p = test::scalar_pair_plant();
  const AreaPartition part = test::scalar_pair_partition();
  Gains g{Matrix::Identity(2, 2) * -1.2, Matrix::Identity(2, 2) * -1.2};
  EXPECT_NO_THROW(design_gains(p, part, GainStrategy::user_supplied, &g));
  EXPECT_THROW(design_gains(p, part, GainStrategy::user_supplied), Error);
  g.F = Matrix::Zero(2, 2);
  try {
    design_gains(p, part, GainStrategy::user_supplied, &g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_stabilizing);
  }
}

TEST(Dcf, GainStrategyNamesRoundTrip) {
  for (GainStrategy s : {GainStrategy::block_diagonalizing_F_deadbeat_L,
                         GainStrategy::lqr_F_deadbeat_L, GainStrategy::user_supplied})
    EXPECT_EQ(parse_gain_strategy(to_string(s)), s);
  EXPECT_THROW(parse_gain_strategy("pole_placement"), Error);
}

TEST(Dcf, BezoutHoldsOnScalarPair) {
  const Plant p = test::scalar_pair_plant();
  const Matrix L = deadbeat_observer_gain(p, test::scalar_pair_partition());
  EXPECT_TRUE(L.isApprox(-p.A));
  const DcfBundle d = build_dcf(p, -p.A, L);
  EXPECT_LT(d.bezout_residual, 1e-14);
  EXPECT_EQ(d.left_fir_degree, 1);
  EXPECT_EQ(d.right_fir_degree, 1);
}
