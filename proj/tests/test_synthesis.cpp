#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nrf/synthesis.hpp"
#include "support.hpp"

using namespace nrf;

namespace {

// Stable scalar pair: the central controller is stable, so every point of the
// parameter line realizes cleanly.
struct Toy {
  Plant plant;
  AreaPartition part;
  DcfBundle d;
  QParametrization full;
  QParametrization one;
};

Toy make_toy() {
  Toy t;
  t.plant.A = Matrix::Identity(2, 2) * 0.5;
  t.plant.Bu = Matrix::Identity(2, 2);
  t.plant.Bd = Matrix::Identity(2, 2);
  t.part = AreaPartition::build({{1, 1}, {1, 1}});
  t.d = build_dcf(t.plant, -t.plant.A, deadbeat_observer_gain(t.plant, t.part));
  t.full = parametrize(t.d, pattern_from_neighborhoods(t.part, {{0}, {1}}), 1);
  t.one = t.full;
  t.one.basis.resize(1);
  t.one.basis_row.resize(1);
  return t;
}

const Toy& toy() {
  static const Toy t = make_toy();
  return t;
}

SynthesisSpec toy_spec(BoundsMode mode) {
  SynthesisSpec s = default_targets(toy().part, TargetMode::decouple_only);
  s.bounds_mode = mode;
  return s;
}

double search_value(const Toy& t, const QParametrization& p, const Vector& x,
                    const SynthesisSpec& s) {
  const Design des = realize_design(t.d, p, x, t.part);
  return objective(sampled_norms(des, s, FrequencyGrid::half_circle(s.optimizer.search_grid)),
                   s);
}

}  // namespace

TEST(ScalarTf, MatchesPolynomialRatio) {
  const Realization t = scalar_tf({0.5, 0.2}, {1.0, -0.3, 0.02});
  for (double th : {0.0, 0.4, 1.3, 2.9}) {
    const Complex z = std::polar(1.0, th);
    const Complex want = (0.5 * z + 0.2) / (z * z - 0.3 * z + 0.02);
    EXPECT_LT(std::abs(t.eval(z)(0, 0) - want), 1e-12);
  }
}

TEST(ScalarTf, StaticAndZero) {
  EXPECT_EQ(scalar_tf({2.0}, {4.0}).order(), 0);
  EXPECT_DOUBLE_EQ(scalar_tf({2.0}, {4.0}).D()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(scalar_tf({0.0}, {1.0, 0.5}).eval(Complex(1.0, 0.0))(0, 0).real(), 0.0);
}

TEST(ScalarTf, RejectsImproperAndUnstable) {
  EXPECT_THROW(scalar_tf({1.0, 0.0, 0.0}, {1.0, 0.5}), Error);
  EXPECT_THROW(scalar_tf({1.0}, {1.0, -1.5}), Error);
  EXPECT_THROW(scalar_tf({1.0}, {0.0}), Error);
}

TEST(ScaledTarget, IsOuterProductWithScalar) {
  const Realization t = scalar_tf({1.0}, {1.0, -0.4});
  Matrix E(2, 3);
  E << 1, 0, 2, 0, -1, 0.5;
  const Realization r = scaled_target(t, E);
  const Complex z = std::polar(1.0, 0.7);
  EXPECT_LT((r.eval(z) - t.eval(z)(0, 0) * E.cast<Complex>()).norm(), 1e-12);
}

TEST(SynthesisSpec, DefaultTargetsAreDelayedIdentityOnDiagonal) {
  const AreaPartition part = AreaPartition::build({{2, 1}, {1, 1}, {3, 2}});
  const SynthesisSpec s = default_targets(part, TargetMode::decouple_only);
  ASSERT_EQ(s.areas, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      EXPECT_EQ(s.Tu[i][j].has_value(), i == j);
      EXPECT_FALSE(s.Tc[i][j].has_value());
      EXPECT_EQ(s.weights.c(i, j), 0.0);
      EXPECT_EQ(s.weights.u(i, j), 1.0);
    }
  const Realization& t = *s.Tu[2][2];
  const int m = part.size(Signal::x, 2) + part.size(Signal::u, 2);
  const Complex z = std::polar(1.0, 1.1);
  EXPECT_LT((t.eval(z) - CMatrix::Identity(m, m) / z).norm(), 1e-12);
  EXPECT_NO_THROW(s.validate(part, full_neighborhoods(3), 2));
}

TEST(SynthesisSpec, ValidateRejectsBadInput) {
  const AreaPartition& part = toy().part;
  const Neighborhoods nb = full_neighborhoods(2);
  SynthesisSpec s = toy_spec(BoundsMode::none);
  s.norm = "h2";
  EXPECT_THROW(s.validate(part, nb, 2), Error);
  s = toy_spec(BoundsMode::none);
  s.weights.u(0, 1) = -1.0;
  EXPECT_THROW(s.validate(part, nb, 2), Error);
  s = toy_spec(BoundsMode::none);
  s.Tu[0][1] = Realization::delay(2);
  EXPECT_THROW(s.validate(part, nb, 2), Error);
  s = toy_spec(BoundsMode::none);
  s.Tc[0][1] = Realization::gain(Matrix::Ones(2, 1));
  EXPECT_THROW(s.validate(part, {{0}, {1}}, 2), Error);
  s = toy_spec(BoundsMode::none);
  s.Td[0] = Realization::gain(Matrix::Ones(3, 3));
  EXPECT_THROW(s.validate(part, nb, 2), Error);
}

TEST(Objective, WeightedSumSkipsZeroWeights) {
  SynthesisSpec s = toy_spec(BoundsMode::none);
  GammaTable g = GammaTable::filled(2, 0.0);
  g.d = {1.0, 2.0};
  g.u << 3, 4, 5, 6;
  g.c << 100, 100, 100, 100;
  s.weights.d = {0.5, 0.0};
  EXPECT_DOUBLE_EQ(objective(g, s), 0.5 + 3 + 4 + 5 + 6);
  g.c(0, 0) = kNoBound;
  EXPECT_TRUE(std::isfinite(objective(g, s)));
}

TEST(BoundHits, ReportsOnlyFiniteActiveBounds) {
  GammaTable g = GammaTable::filled(2, 1.0);
  GammaTable b = GammaTable::filled(2, kNoBound);
  EXPECT_TRUE(bound_hits(g, b).empty());
  b.u(0, 1) = 1.0;
  b.d[1] = 2.0;
  const auto hits = bound_hits(g, b);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_NE(hits[0].find("gamma_u(1,2)"), std::string::npos);
}

TEST(Synthesis, SampledObjectiveIsConvexInParameters) {
  const Toy& t = toy();
  const SynthesisSpec s = toy_spec(BoundsMode::none);
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 12; ++trial) {
    const Vector a = test::random_matrix(rng, t.full.size(), 1, 1.5);
    const Vector b = test::random_matrix(rng, t.full.size(), 1, 1.5);
    const double fa = search_value(t, t.full, a, s);
    const double fb = search_value(t, t.full, b, s);
    const double fm = search_value(t, t.full, 0.5 * (a + b), s);
    EXPECT_LE(fm, 0.5 * (fa + fb) + 1e-9);
  }
}

TEST(Synthesis, OneParameterOptimumBeatsBruteForceScan) {
  const Toy& t = toy();
  const SynthesisSpec s = toy_spec(BoundsMode::none);
  const SynthesisResult r = solve(s, t.d, t.one, t.part);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 800; ++k) {
    Vector x(1);
    x << -2.0 + 4.0 * k / 800;
    best = std::min(best, search_value(t, t.one, x, s));
  }
  EXPECT_LE(r.search_objective, best + 1e-6);
  EXPECT_GE(r.search_objective, best - 1e-3);
}

TEST(Synthesis, LogsAreNonIncreasingAndPostHocIsExact) {
  const Toy& t = toy();
  const SynthesisSpec s = toy_spec(BoundsMode::none);
  const SynthesisResult r = solve(s, t.d, t.full, t.part);
  ASSERT_FALSE(r.start_logs.empty());
  for (const auto& log : r.start_logs)
    for (size_t k = 1; k < log.size(); ++k) EXPECT_LE(log[k], log[k - 1] + 1e-12);
  EXPECT_DOUBLE_EQ(r.log.back(), r.search_objective);
  const GammaTable again = constraint_norms(t.d, t.full, r.x, s, t.part);
  EXPECT_NEAR(objective(again, s), r.objective, 1e-9);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(again.u(i, j), r.gamma.u(i, j), 1e-9);
  EXPECT_LE(r.objective, search_value(t, t.full, Vector::Zero(t.full.size()), s) + 1e-3);
}

TEST(Synthesis, BootstrapBoundsAreRespected) {
  const Toy& t = toy();
  const SynthesisSpec s = toy_spec(BoundsMode::bootstrap);
  const SynthesisResult r = solve(s, t.d, t.full, t.part);
  const GammaTable g0 = constraint_norms(t.d, t.full, Vector::Zero(t.full.size()), s, t.part);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(r.bounds.u(i, j), g0.u(i, j), 1e-12);
      EXPECT_LE(r.gamma.u(i, j), r.bounds.u(i, j) * (1.0 + 1e-3) + 1e-12);
      EXPECT_TRUE(std::isinf(r.bounds.c(i, j)));
    }
}

TEST(Synthesis, RejectsInitialConditionWeights) {
  const Toy& t = toy();
  SynthesisSpec s = toy_spec(BoundsMode::none);
  s.weights.c(0, 0) = 1.0;
  EXPECT_THROW(solve(s, t.d, t.full, t.part), Error);
}

TEST(Algorithm, FactorizationFailureIsReported) {
  const Toy& t = toy();
  AlgorithmConfig cfg;
  cfg.strategy = GainStrategy::user_supplied;
  cfg.gains = Gains{-t.plant.A, Matrix::Zero(2, 2)};
  const DesignReport rep = run_algorithm1(t.plant, t.part, {{0}, {1}},
                                          toy_spec(BoundsMode::none), cfg);
  EXPECT_EQ(rep.status, DesignStatus::factorization_failed);
  EXPECT_FALSE(rep.message.empty());
  EXPECT_FALSE(rep.result.has_value());
}

TEST(Algorithm, SparsityInfeasibilityCarriesHint) {
  Plant p;
  p.A.resize(3, 3);
  p.A << 0.5, 1, 0.3, 0.2, 0.4, 0.7, 0.6, 0.1, 0.9;
  p.Bu = Matrix::Zero(3, 2);
  p.Bu(0, 0) = 1.0;
  p.Bu(2, 1) = 1.0;
  p.Bd = Matrix::Identity(3, 3);
  const AreaPartition part = AreaPartition::build({{2, 1}, {1, 1}});
  AlgorithmConfig cfg;
  cfg.strategy = GainStrategy::lqr_F_deadbeat_L;
  const DesignReport rep = run_algorithm1(
      p, part, {{0}, {1}}, default_targets(part, TargetMode::decouple_only), cfg);
  EXPECT_EQ(rep.status, DesignStatus::sparsity_infeasible);
  ASSERT_FALSE(rep.hints.empty());
  EXPECT_NE(rep.hints[0].find("area"), std::string::npos);
}

TEST(Algorithm, ViolatedExplicitBoundsAreInfeasible) {
  const Toy& t = toy();
  SynthesisSpec s = toy_spec(BoundsMode::explicit_values);
  s.bounds.u(0, 0) = 1e-9;
  AlgorithmConfig cfg;
  cfg.strategy = GainStrategy::user_supplied;
  cfg.gains = Gains{-t.plant.A, deadbeat_observer_gain(t.plant, t.part)};
  const DesignReport rep = run_algorithm1(t.plant, t.part, {{0}, {1}}, s, cfg);
  EXPECT_EQ(rep.status, DesignStatus::bounds_infeasible);
  ASSERT_GE(rep.hints.size(), 2u);
  EXPECT_NE(rep.hints[0].find("gamma_u(1,1)"), std::string::npos);
}

TEST(Algorithm, ToyRunSucceeds) {
  const Toy& t = toy();
  AlgorithmConfig cfg;
  cfg.strategy = GainStrategy::user_supplied;
  cfg.gains = Gains{-t.plant.A, deadbeat_observer_gain(t.plant, t.part)};
  const DesignReport rep =
      run_algorithm1(t.plant, t.part, {{0}, {1}}, toy_spec(BoundsMode::bootstrap), cfg);
  ASSERT_EQ(rep.status, DesignStatus::ok) << rep.message;
  ASSERT_TRUE(rep.result.has_value());
  EXPECT_EQ(rep.param.size(), 2);
  EXPECT_LE(rep.result->design.maps.IQ.order() == 0
                ? 0.0
                : spectral_radius(rep.result->design.maps.IQ.A()),
            1.0);
}
