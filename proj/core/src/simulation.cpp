#include "nrf/simulation.hpp"

#include <random>
#include <sstream>

namespace nrf {

ScenarioSignals ScenarioSignals::zeros(int nx, int nu, int nd, int nw, int horizon) {
  if (horizon <= 0)
    throw Error(ErrorCode::invalid_argument, "horizon must be positive");
  ScenarioSignals s;
  s.d = SignalTrace(nd, horizon);
  s.zeta = SignalTrace(nx, horizon);
  s.us1 = SignalTrace(nx, horizon);
  s.us2 = SignalTrace(nu, horizon);
  s.bs1 = SignalTrace(nx, horizon);
  s.bs2 = SignalTrace(nu, horizon);
  s.bf = SignalTrace(nu, horizon);
  s.bw = SignalTrace(nw, horizon);
  return s;
}

SignalTrace ScenarioSignals::beta_x() const {
  SignalTrace t = zeta;
  t.data += us1.data + bs1.data;
  return t;
}

SignalTrace ScenarioSignals::beta_u() const {
  SignalTrace t = us2;
  t.data += bs2.data;
  return t;
}

namespace {

SignalTrace vstack(const std::vector<const SignalTrace*>& parts) {
  int dim = 0;
  for (auto* p : parts) dim += p->dim();
  SignalTrace out(dim, parts.front()->horizon(), parts.front()->start_index);
  int r = 0;
  for (auto* p : parts) {
    out.data.middleRows(r, p->dim()) = p->data;
    r += p->dim();
  }
  return out;
}

}  // namespace

SignalTrace ScenarioSignals::ds() const {
  const SignalTrace bx = beta_x(), bu = beta_u();
  return vstack({&bx, &bu, &bf, &d});
}

SignalTrace ScenarioSignals::exogenous_ds() const {
  SignalTrace bx = zeta;
  bx.data += bs1.data;
  return vstack({&bx, &bs2, &bf, &d});
}

SignalTrace ScenarioSignals::shaping() const { return vstack({&us1, &us2}); }

void ScenarioSignals::check(int nx, int nu, int nd, int nw) const {
  const int H = horizon();
  auto expect = [&](const SignalTrace& t, int dim, const char* name) {
    if (t.dim() != dim || t.horizon() != H) {
      std::ostringstream os;
      os << "signal '" << name << "' is " << t.dim() << "x" << t.horizon()
         << ", expected " << dim << "x" << H;
      throw Error(ErrorCode::dimension_mismatch, os.str());
    }
  };
  expect(d, nd, "d");
  expect(zeta, nx, "zeta");
  expect(us1, nx, "us1");
  expect(us2, nu, "us2");
  expect(bs1, nx, "bs1");
  expect(bs2, nu, "bs2");
  expect(bf, nu, "bf");
  expect(bw, nw, "bw");
}

NoiseSettings NoiseSettings::all(double amplitude, NoiseKind kind) {
  NoiseSettings n;
  n.kind = kind;
  n.d = n.zeta = n.us1 = n.us2 = n.bs1 = n.bs2 = n.bf = n.bw = amplitude;
  return n;
}

ScenarioSignals compose_signals(int nx, int nu, int nd, int nw, int horizon,
                                std::uint64_t seed, const NoiseSettings& noise) {
  ScenarioSignals s = ScenarioSignals::zeros(nx, nu, nd, nw, horizon);
  s.seed = seed;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto fill = [&](SignalTrace& t, double amp) {
    if (amp == 0.0) return;
    for (int k = 0; k < t.horizon(); ++k)
      for (int r = 0; r < t.dim(); ++r)
        t.data(r, k) = amp * (noise.kind == NoiseKind::uniform ? uni(gen) : gauss(gen));
  };
  fill(s.d, noise.d);
  fill(s.zeta, noise.zeta);
  fill(s.us1, noise.us1);
  fill(s.us2, noise.us2);
  fill(s.bs1, noise.bs1);
  fill(s.bs2, noise.bs2);
  fill(s.bf, noise.bf);
  fill(s.bw, noise.bw);
  return s;
}

Matrix LoopTrace::xuf() const {
  Matrix out(x.dim() + uf.dim(), x.horizon());
  out << x.data, uf.data;
  return out;
}

namespace {

LoopTrace make_trace(int nx, int nu, int nw, int H, std::uint64_t seed) {
  LoopTrace t;
  t.x = SignalTrace(nx, H);
  t.uf = SignalTrace(nu, H);
  t.u = SignalTrace(nu, H);
  t.w = SignalTrace(nw, H);
  t.w_reported = SignalTrace(nw, H);
  t.seed = seed;
  return t;
}

void check_no_loop(const Matrix& Du, const std::string& where) {
  if (Du.size() > 0 && !Du.isZero(0.0))
    throw Error(ErrorCode::algebraic_loop,
                where + ": controller feedthrough from u_f is nonzero");
}

}  // namespace

LoopTrace simulate_monolithic(const Plant& plant, const Realization& bank,
                              const ScenarioSignals& s, const Vector& xc,
                              const Vector& wc) {
  plant.validate();
  const int nx = plant.nx(), nu = plant.nu(), nd = plant.nd(), nw = bank.order();
  if (bank.inputs() != nu + nx || bank.outputs() != nu)
    throw Error(ErrorCode::dimension_mismatch, "controller bank has wrong shape");
  if (xc.size() != nx || wc.size() != nw)
    throw Error(ErrorCode::dimension_mismatch, "initial condition has wrong size");
  s.check(nx, nu, nd, nw);
  check_no_loop(bank.D().leftCols(nu), "simulate_monolithic");
  const Matrix Dx = bank.D().rightCols(nx);
  const Matrix Bu = bank.B().leftCols(nu), Bx = bank.B().rightCols(nx);
  const SignalTrace bx = s.beta_x(), bu = s.beta_u();
  const int H = s.horizon();
  LoopTrace t = make_trace(nx, nu, nw, H, s.seed);
  Vector x = xc, w = wc;
  for (int k = 0; k < H; ++k) {
    const Vector vx = x + bx.data.col(k);
    const Vector uf = bank.C() * w + Dx * vx;
    const Vector u = uf + bu.data.col(k);
    t.x.data.col(k) = x;
    t.uf.data.col(k) = uf;
    t.u.data.col(k) = u;
    t.w.data.col(k) = w;
    t.w_reported.data.col(k) = w + s.bw.data.col(k);
    w = bank.A() * w + Bu * (uf + s.bf.data.col(k)) + Bx * vx;
    x = plant.A * x + plant.Bu * u + plant.Bd * s.d.data.col(k);
  }
  return t;
}

namespace {

struct LocalController {
  int area = 0;
  std::vector<int> w_idx;
  std::vector<int> uf_idx;
  std::vector<int> in_u;  // global u indices read from neighbors
  std::vector<int> in_x;  // global x indices read from neighbors
  Matrix A, Bu, Bx, C, Dx;
};

LocalController localize(const AreaController& a, const AreaPartition& part,
                         const Neighborhoods& nb) {
  const int nu = part.total(Signal::u);
  LocalController lc;
  lc.area = a.area;
  lc.w_idx = part.indices(Signal::w, a.area);
  lc.uf_idx = part.indices(Signal::u, a.area);
  std::vector<int> dropped;
  for (int j = 0; j < part.areas(); ++j) {
    const bool keep = in_neighborhood(nb, a.area, j);
    for (int k : part.indices(Signal::u, j)) (keep ? lc.in_u : dropped).push_back(k);
    for (int k : part.indices(Signal::x, j))
      keep ? lc.in_x.push_back(k) : dropped.push_back(nu + k);
  }
  for (int c : dropped) {
    if (!a.r.B().col(c).isZero(0.0) || !a.r.D().col(c).isZero(0.0)) {
      const int src = c < nu ? part.area_of(Signal::u, c) : part.area_of(Signal::x, c - nu);
      throw Error(ErrorCode::unavailable_message,
                  "area " + std::to_string(a.area + 1) + " needs a message from area " +
                      std::to_string(src + 1) + " outside its neighborhood");
    }
  }
  check_no_loop(a.r.D().leftCols(nu), "area " + std::to_string(a.area + 1));
  const int n = a.r.order();
  lc.A = a.r.A();
  lc.C = a.r.C();
  lc.Bu = Matrix(n, lc.in_u.size());
  for (size_t k = 0; k < lc.in_u.size(); ++k) lc.Bu.col(k) = a.r.B().col(lc.in_u[k]);
  lc.Bx = Matrix(n, lc.in_x.size());
  lc.Dx = Matrix(a.r.outputs(), lc.in_x.size());
  for (size_t k = 0; k < lc.in_x.size(); ++k) {
    lc.Bx.col(k) = a.r.B().col(nu + lc.in_x[k]);
    lc.Dx.col(k) = a.r.D().col(nu + lc.in_x[k]);
  }
  return lc;
}

Vector gather(const Vector& v, const std::vector<int>& idx) {
  Vector out(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) out(k) = v(idx[k]);
  return out;
}

}  // namespace

LoopTrace simulate_distributed(const Plant& plant,
                               const std::vector<AreaController>& bank,
                               const AreaPartition& part, const Neighborhoods& nb,
                               const ScenarioSignals& s, const Vector& xc,
                               const Vector& wc, MessageMode mode) {
  plant.validate();
  validate_neighborhoods(nb, part.areas());
  if (static_cast<int>(bank.size()) != part.areas())
    throw Error(ErrorCode::dimension_mismatch, "bank size differs from area count");
  const AreaPartition wp = partition_with_bank(part, bank);
  const int nx = plant.nx(), nu = plant.nu(), nd = plant.nd();
  const int nw = wp.total(Signal::w);
  if (xc.size() != nx || wc.size() != nw)
    throw Error(ErrorCode::dimension_mismatch, "initial condition has wrong size");
  s.check(nx, nu, nd, nw);
  std::vector<LocalController> local;
  for (const auto& a : bank) local.push_back(localize(a, wp, nb));

  const SignalTrace bx = s.beta_x(), bu = s.beta_u();
  const int H = s.horizon();
  LoopTrace t = make_trace(nx, nu, nw, H, s.seed);
  Vector x = xc;
  std::vector<Vector> w;
  for (const auto& lc : local) w.push_back(gather(wc, lc.w_idx));
  Vector umsg_prev = Vector::Zero(nu);
  Vector uf(nu);
  for (int k = 0; k < H; ++k) {
    const Vector xmsg = x + bx.data.col(k);
    for (const auto& lc : local) {
      const Vector ufi = lc.C * w[lc.area] + lc.Dx * gather(xmsg, lc.in_x);
      for (size_t r = 0; r < lc.uf_idx.size(); ++r) uf(lc.uf_idx[r]) = ufi(r);
    }
    const Vector umsg = uf + s.bf.data.col(k);
    const Vector& umsg_used = mode == MessageMode::synchronous ? umsg : umsg_prev;
    const Vector u = uf + bu.data.col(k);
    t.x.data.col(k) = x;
    t.uf.data.col(k) = uf;
    t.u.data.col(k) = u;
    for (const auto& lc : local) {
      for (size_t r = 0; r < lc.w_idx.size(); ++r) {
        t.w.data(lc.w_idx[r], k) = w[lc.area](r);
        t.w_reported.data(lc.w_idx[r], k) = w[lc.area](r) + s.bw.data(lc.w_idx[r], k);
      }
    }
    for (const auto& lc : local)
      w[lc.area] = lc.A * w[lc.area] + lc.Bu * gather(umsg_used, lc.in_u) +
                   lc.Bx * gather(xmsg, lc.in_x);
    umsg_prev = umsg;
    x = plant.A * x + plant.Bu * u + plant.Bd * s.d.data.col(k);
  }
  return t;
}

double max_abs_difference(const LoopTrace& a, const LoopTrace& b) {
  auto diff = [](const SignalTrace& p, const SignalTrace& q) {
    if (p.data.rows() != q.data.rows() || p.data.cols() != q.data.cols())
      throw Error(ErrorCode::dimension_mismatch, "traces differ in shape");
    return p.data.size() ? (p.data - q.data).cwiseAbs().maxCoeff() : 0.0;
  };
  return std::max({diff(a.x, b.x), diff(a.uf, b.uf), diff(a.u, b.u), diff(a.w, b.w)});
}

}  // namespace nrf
