#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace nrf;
using nrf::test::shared_grid_design;

namespace {

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

ScenarioSignals zero_signals(const test::GridDesign& s, int H) {
  return ScenarioSignals::zeros(s.maps.nx, s.maps.nu, s.maps.nd, s.maps.nw, H);
}

Vector zeros(int n) { return Vector::Zero(n); }

}  // namespace

TEST(Signals, ZeroAmplitudeGivesZeroTraces) {
  const ScenarioSignals s = compose_signals(4, 2, 3, 5, 20, 42, NoiseSettings::all(0.0));
  for (const SignalTrace* t : {&s.d, &s.zeta, &s.us1, &s.us2, &s.bs1, &s.bs2, &s.bf, &s.bw})
    EXPECT_EQ(max_abs(t->data), 0.0);
  EXPECT_EQ(s.seed, 42u);
}

TEST(Signals, SameSeedSameTraces) {
  for (NoiseKind kind : {NoiseKind::uniform, NoiseKind::gaussian}) {
    const NoiseSettings n = NoiseSettings::all(0.3, kind);
    const ScenarioSignals a = compose_signals(4, 2, 3, 5, 50, 9, n);
    const ScenarioSignals b = compose_signals(4, 2, 3, 5, 50, 9, n);
    const ScenarioSignals c = compose_signals(4, 2, 3, 5, 50, 10, n);
    EXPECT_EQ(a.ds().data, b.ds().data);
    EXPECT_EQ(a.bw.data, b.bw.data);
    EXPECT_NE(a.ds().data, c.ds().data);
  }
  const ScenarioSignals u = compose_signals(3, 1, 1, 1, 500, 1, NoiseSettings::all(0.25));
  EXPECT_LE(max_abs(u.d.data), 0.25);
  EXPECT_LE(max_abs(u.ds().data), 0.75);
}

TEST(Signals, CompoundsFollowTheirDefinitions) {
  const ScenarioSignals s = compose_signals(3, 2, 1, 2, 30, 5, NoiseSettings::all(1.0));
  EXPECT_LT(max_abs(s.beta_x().data - (s.zeta.data + s.us1.data + s.bs1.data)), 1e-14);
  EXPECT_LT(max_abs(s.beta_u().data - (s.us2.data + s.bs2.data)), 1e-14);
  const Matrix ds = s.ds().data;
  ASSERT_EQ(ds.rows(), 3 + 2 + 2 + 1);
  EXPECT_EQ(ds.middleRows(5, 2), s.bf.data);
  EXPECT_EQ(ds.bottomRows(1), s.d.data);
  const Matrix exo = s.exogenous_ds().data;
  EXPECT_LT(max_abs(exo.topRows(3) - (s.zeta.data + s.bs1.data)), 1e-14);
  EXPECT_EQ(exo.middleRows(3, 2), s.bs2.data);
  EXPECT_EQ(s.shaping().data.topRows(3), s.us1.data);
}

TEST(Signals, DisturbanceOnlyLeavesCompoundsZero) {
  ScenarioSignals s = ScenarioSignals::zeros(3, 2, 1, 2, 10);
  s.d.data.setConstant(0.5);
  EXPECT_EQ(max_abs(s.beta_x().data), 0.0);
  EXPECT_EQ(max_abs(s.beta_u().data), 0.0);
}

TEST(Signals, HorizonMismatchDetected) {
  ScenarioSignals s = ScenarioSignals::zeros(3, 2, 1, 2, 10);
  s.d = SignalTrace(1, 11);
  EXPECT_THROW(s.check(3, 2, 1, 2), Error);
  EXPECT_THROW(ScenarioSignals::zeros(3, 2, 1, 2, 0), Error);
}

TEST(Monolithic, ZeroInputsStayAtRest) {
  const test::GridDesign& s = shared_grid_design();
  const LoopTrace tr = simulate_monolithic(s.g.plant, s.Kw, zero_signals(s, 50),
                                           zeros(s.maps.nx), zeros(s.maps.nw));
  EXPECT_EQ(max_abs(tr.x.data), 0.0);
  EXPECT_EQ(max_abs(tr.u.data), 0.0);
  EXPECT_EQ(max_abs(tr.w.data), 0.0);
}

TEST(Monolithic, DisturbanceImpulseMatchesFqColumn) {
  const test::GridDesign& s = shared_grid_design();
  const int H = 40;
  for (int c : {0, 3}) {
    ScenarioSignals sig = zero_signals(s, H);
    sig.d.data(c, 0) = 1.0;
    const LoopTrace tr = simulate_monolithic(s.g.plant, s.Kw, sig, zeros(s.maps.nx),
                                             zeros(s.maps.nw));
    const Matrix xuf = tr.xuf();
    const Realization col = select_cols(s.maps.FQ, {s.maps.fq_col_d() + c});
    for (int k = 0; k < H; ++k)
      EXPECT_LT((xuf.col(k) - markov(col, k)).cwiseAbs().maxCoeff(), 1e-10) << k;
  }
}

TEST(Monolithic, InputIdentityAndReportedState) {
  const test::GridDesign& s = shared_grid_design();
  const ScenarioSignals sig = test::random_signals(s, 60, 3);
  const LoopTrace tr =
      simulate_monolithic(s.g.plant, s.Kw, sig, zeros(s.maps.nx), zeros(s.maps.nw));
  EXPECT_LT(max_abs(tr.u.data - tr.uf.data - sig.us2.data - sig.bs2.data), 1e-14);
  EXPECT_LT(max_abs(tr.w_reported.data - tr.w.data - sig.bw.data), 1e-14);

  ScenarioSignals no_bw = sig;
  no_bw.bw.data.setZero();
  const LoopTrace tr2 =
      simulate_monolithic(s.g.plant, s.Kw, no_bw, zeros(s.maps.nx), zeros(s.maps.nw));
  EXPECT_EQ(tr.x.data, tr2.x.data);
  EXPECT_EQ(tr.w.data, tr2.w.data);
}

TEST(Monolithic, Superposition) {
  const test::GridDesign& s = shared_grid_design();
  const int H = 100;
  const ScenarioSignals a = test::random_signals(s, H, 1), b = test::random_signals(s, H, 2);
  ScenarioSignals sum = a;
  for (auto [dst, x, y] : {std::tuple{&sum.d, &a.d, &b.d}, {&sum.zeta, &a.zeta, &b.zeta},
                           {&sum.us1, &a.us1, &b.us1}, {&sum.us2, &a.us2, &b.us2},
                           {&sum.bs1, &a.bs1, &b.bs1}, {&sum.bs2, &a.bs2, &b.bs2},
                           {&sum.bf, &a.bf, &b.bf}, {&sum.bw, &a.bw, &b.bw}})
    dst->data = x->data + y->data;
  const Vector x0 = zeros(s.maps.nx), w0 = zeros(s.maps.nw);
  const LoopTrace ta = simulate_monolithic(s.g.plant, s.Kw, a, x0, w0);
  const LoopTrace tb = simulate_monolithic(s.g.plant, s.Kw, b, x0, w0);
  const LoopTrace ts = simulate_monolithic(s.g.plant, s.Kw, sum, x0, w0);
  EXPECT_LT(max_abs(ts.xuf() - ta.xuf() - tb.xuf()), 1e-9);
}

TEST(Monolithic, ClosedLoopIdentity) {
  const test::GridDesign& s = shared_grid_design();
  std::mt19937_64 rng(12);
  const int H = 200;
  for (int trial = 0; trial < 3; ++trial) {
    const ScenarioSignals sig = test::random_signals(s, H, rng());
    const Vector xc = test::random_matrix(rng, s.maps.nx, 1);
    const Vector wc = test::random_matrix(rng, s.maps.nw, 1);
    const LoopTrace tr = simulate_monolithic(s.g.plant, s.Kw, sig, xc, wc);
    Vector ic(xc.size() + wc.size());
    ic << xc, wc;
    const Matrix rec = star(s.maps.FQ, sig.ds()).data + impulse_path(s.maps.IQ, ic, H).data;
    EXPECT_LT(max_abs(tr.xuf() - rec), 1e-6);
  }
}

TEST(Monolithic, FeedthroughOnControllerOutputsIsAnAlgebraicLoop) {
  const test::GridDesign& s = shared_grid_design();
  Matrix D = s.Kw.D();
  D(0, 1) = 0.5;
  const Realization looped(s.Kw.A(), s.Kw.B(), s.Kw.C(), D);
  try {
    simulate_monolithic(s.g.plant, looped, zero_signals(s, 5), zeros(s.maps.nx),
                        zeros(s.maps.nw));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::algebraic_loop);
  }
}

TEST(Monolithic, BoundedByImpulseResponseL1Norm) {
  const test::GridDesign& s = shared_grid_design();
  const int H = 10000;
  const double a = 0.1;
  ScenarioSignals sig = test::random_signals(s, H, 55, a);
  sig.bw.data.setZero();
  const LoopTrace tr =
      simulate_monolithic(s.g.plant, s.Kw, sig, zeros(s.maps.nx), zeros(s.maps.nw));
  const Realization xrows = row_block(s.maps.FQ, 0, s.maps.nx);
  Vector amp = Vector::Constant(xrows.inputs(), a);
  amp.head(s.maps.nx).setConstant(3 * a);
  amp.segment(s.maps.nx, s.maps.nu).setConstant(2 * a);
  std::vector<double> row_sums(s.maps.nx, 0.0);
  Matrix h = xrows.B();
  for (int k = 0; k < 3000; ++k) {
    const Matrix m = k == 0 ? xrows.D() : Matrix(xrows.C() * h);
    if (k > 0) h = xrows.A() * h;
    for (int r = 0; r < s.maps.nx; ++r) row_sums[r] += m.row(r).cwiseAbs().dot(amp.transpose());
  }
  for (int r = 0; r < s.maps.nx; ++r) {
    const double bound = row_sums[r] * (1.0 + 1e-9);
    EXPECT_TRUE(std::isfinite(tr.x.data.row(r).cwiseAbs().maxCoeff()));
    EXPECT_LE(tr.x.data.row(r).cwiseAbs().maxCoeff(), bound) << r;
  }
}

TEST(Distributed, MatchesMonolithicOnGrid) {
  const test::GridDesign& s = shared_grid_design();
  std::mt19937_64 rng(90);
  for (int trial = 0; trial < 5; ++trial) {
    const ScenarioSignals sig = test::random_signals(s, 500, rng());
    const Vector xc = test::random_matrix(rng, s.maps.nx, 1);
    const Vector wc = test::random_matrix(rng, s.maps.nw, 1);
    const LoopTrace mono = simulate_monolithic(s.g.plant, s.Kw, sig, xc, wc);
    const LoopTrace dist =
        simulate_distributed(s.g.plant, s.bank, s.g.partition, s.g.neighborhoods, sig, xc, wc);
    EXPECT_LE(max_abs_difference(mono, dist), 1e-10);
  }
}

TEST(Distributed, FullNeighborhoodsTrivialCase) {
  const Plant p = test::scalar_pair_plant();
  const AreaPartition part = test::scalar_pair_partition();
  const DcfBundle d = build_dcf(p, -p.A, deadbeat_observer_gain(p, part));
  std::vector<Matrix> taps = {Matrix::Constant(2, 2, 0.1)};
  const NrfPair pair = form_nrf_pair(d, fir_realization(taps));
  const std::vector<AreaController> bank = build_bank(pair.KD, part);
  const Realization Kw = bank_realization(bank);
  const ScenarioSignals sig = compose_signals(2, 2, 2, Kw.order(), 100, 8, NoiseSettings::all(1));
  const Vector x0 = Vector::Ones(2), w0 = Vector::Zero(Kw.order());
  const LoopTrace mono = simulate_monolithic(p, Kw, sig, x0, w0);
  const LoopTrace dist = simulate_distributed(p, bank, part, full_neighborhoods(2), sig, x0, w0);
  EXPECT_LE(max_abs_difference(mono, dist), 1e-12);
  try {
    simulate_distributed(p, bank, part, {{0}, {1}}, sig, x0, w0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unavailable_message);
  }
}

TEST(Distributed, DelayedMessagesDiverge) {
  const test::GridDesign& s = shared_grid_design();
  const ScenarioSignals sig = test::random_signals(s, 200, 6);
  const Vector xc = zeros(s.maps.nx), wc = zeros(s.maps.nw);
  const LoopTrace sync = simulate_distributed(s.g.plant, s.bank, s.g.partition,
                                              s.g.neighborhoods, sig, xc, wc);
  const LoopTrace late = simulate_distributed(s.g.plant, s.bank, s.g.partition,
                                              s.g.neighborhoods, sig, xc, wc,
                                              MessageMode::delayed_u);
  const LoopTrace mono = simulate_monolithic(s.g.plant, s.Kw, sig, xc, wc);
  EXPECT_LE(max_abs_difference(sync, mono), 1e-10);
  EXPECT_GT(max_abs_difference(late, mono), 1e-3);
}
