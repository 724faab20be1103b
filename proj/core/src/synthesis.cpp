#include "nrf/synthesis.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace nrf {

GammaTable GammaTable::filled(int N, double value) {
  GammaTable g;
  g.d.assign(N, value);
  g.u = Matrix::Constant(N, N, value);
  g.c = Matrix::Constant(N, N, value);
  return g;
}

namespace {

int block_rows(const AreaPartition& part, int i) {
  return part.size(Signal::x, i) + part.size(Signal::u, i);
}

void check_target(const std::optional<Realization>& t, int rows, int cols,
                  const std::string& name) {
  if (!t) return;
  if (t->outputs() != rows || t->inputs() != cols)
    throw Error(ErrorCode::invalid_argument,
                "target " + name + " is " + std::to_string(t->outputs()) + "x" +
                    std::to_string(t->inputs()) + ", expected " + std::to_string(rows) +
                    "x" + std::to_string(cols));
  if (t->order() > 0 && spectral_radius(*t) >= 1.0)
    throw Error(ErrorCode::invalid_argument, "target " + name + " is not stable");
}

std::string pair_name(const char* kind, int i, int j) {
  return std::string(kind) + "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
}

std::string single_name(const char* kind, int i) {
  return std::string(kind) + "(" + std::to_string(i + 1) + ")";
}

}  // namespace

void SynthesisSpec::validate(const AreaPartition& part, const Neighborhoods& nb,
                             int nd) const {
  const int N = part.areas();
  if (areas != N)
    throw Error(ErrorCode::invalid_argument, "synthesis spec is sized for " +
                                                 std::to_string(areas) + " areas, plant has " +
                                                 std::to_string(N));
  if (norm != "hinf")
    throw Error(ErrorCode::invalid_argument,
                "norm '" + norm + "' is not supported; only 'hinf' is implemented");
  validate_neighborhoods(nb, N);
  auto sized = [&](const GammaTable& g, const char* what) {
    if (static_cast<int>(g.d.size()) != N || g.u.rows() != N || g.u.cols() != N ||
        g.c.rows() != N || g.c.cols() != N)
      throw Error(ErrorCode::invalid_argument, std::string(what) + " table has wrong size");
    auto bad = [](double v) { return std::isnan(v) || v < 0.0; };
    for (double v : g.d)
      if (bad(v)) throw Error(ErrorCode::invalid_argument, std::string(what) + " must be >= 0");
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        if (bad(g.u(i, j)) || bad(g.c(i, j)))
          throw Error(ErrorCode::invalid_argument, std::string(what) + " must be >= 0");
  };
  sized(weights, "weight");
  sized(bounds, "bound");
  for (double v : weights.d)
    if (std::isinf(v)) throw Error(ErrorCode::invalid_argument, "weights must be finite");
  if (!weights.u.allFinite() || !weights.c.allFinite())
    throw Error(ErrorCode::invalid_argument, "weights must be finite");
  if (static_cast<int>(Td.size()) != N || static_cast<int>(Tu.size()) != N ||
      static_cast<int>(Tc.size()) != N)
    throw Error(ErrorCode::invalid_argument, "target lists must have one entry per area");
  const int nu = part.total(Signal::u);
  for (int i = 0; i < N; ++i) {
    check_target(Td[i], block_rows(part, i), nu + nd, single_name("T_d", i));
    if (static_cast<int>(Tu[i].size()) != N || static_cast<int>(Tc[i].size()) != N)
      throw Error(ErrorCode::invalid_argument, "target lists must be N x N");
    for (int j = 0; j < N; ++j) {
      check_target(Tu[i][j], block_rows(part, i), block_rows(part, j),
                   pair_name("T_u", i, j));
      if (j != i && Tu[i][j] && !is_zero_on_grid(*Tu[i][j]))
        throw Error(ErrorCode::invalid_argument,
                    "target " + pair_name("T_u", i, j) + " must be zero for i != j");
      if (Tc[i][j]) {
        if (Tc[i][j]->outputs() != block_rows(part, i))
          throw Error(ErrorCode::invalid_argument,
                      "target " + pair_name("T_c", i, j) + " has wrong row count");
        if (Tc[i][j]->order() > 0 && spectral_radius(*Tc[i][j]) >= 1.0)
          throw Error(ErrorCode::invalid_argument,
                      "target " + pair_name("T_c", i, j) + " is not stable");
        if (!in_neighborhood(nb, i, j) && !is_zero_on_grid(*Tc[i][j]))
          throw Error(ErrorCode::invalid_argument,
                      "target " + pair_name("T_c", i, j) +
                          " must be zero outside the neighborhood");
      }
    }
  }
}

SynthesisSpec default_targets(const AreaPartition& part, TargetMode mode) {
  (void)mode;
  const int N = part.areas();
  SynthesisSpec s;
  s.areas = N;
  s.Td.assign(N, std::nullopt);
  s.Tu.assign(N, std::vector<std::optional<Realization>>(N));
  s.Tc.assign(N, std::vector<std::optional<Realization>>(N));
  for (int i = 0; i < N; ++i) s.Tu[i][i] = Realization::delay(block_rows(part, i));
  s.weights = GammaTable::filled(N, 1.0);
  s.weights.c.setZero();
  s.bounds = GammaTable::filled(N, kNoBound);
  s.bounds_mode = BoundsMode::bootstrap;
  return s;
}

Realization scalar_tf(const std::vector<double>& num_in, const std::vector<double>& den_in) {
  auto strip = [](std::vector<double> v) {
    size_t k = 0;
    while (k < v.size() && v[k] == 0.0) ++k;
    return std::vector<double>(v.begin() + k, v.end());
  };
  const std::vector<double> den = strip(den_in);
  std::vector<double> num = strip(num_in);
  if (den.empty()) throw Error(ErrorCode::invalid_argument, "denominator is zero");
  if (num.empty()) return Realization::zero(1, 1);
  if (num.size() > den.size())
    throw Error(ErrorCode::invalid_argument,
                "transfer function is improper (numerator degree " +
                    std::to_string(num.size() - 1) + " > denominator degree " +
                    std::to_string(den.size() - 1) + ")");
  const int n = static_cast<int>(den.size()) - 1;
  std::vector<double> a(n + 1), b(n + 1, 0.0);
  for (int k = 0; k <= n; ++k) a[k] = den[k] / den[0];
  for (size_t k = 0; k < num.size(); ++k) b[n + 1 - num.size() + k] = num[k] / den[0];
  if (n == 0) return Realization::gain(Matrix::Constant(1, 1, b[0]));
  Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, 1), C(1, n), D(1, 1);
  for (int k = 0; k < n; ++k) {
    A(0, k) = -a[k + 1];
    if (k + 1 < n) A(k + 1, k) = 1.0;
    C(0, k) = b[k + 1] - b[0] * a[k + 1];
  }
  B(0, 0) = 1.0;
  D(0, 0) = b[0];
  if (spectral_radius(A) >= 1.0)
    throw Error(ErrorCode::invalid_argument, "transfer function is not stable");
  return Realization(A, B, C, D);
}

Realization scaled_target(const Realization& t, const Matrix& E) {
  if (t.inputs() != 1 || t.outputs() != 1)
    throw Error(ErrorCode::invalid_argument, "scaled_target expects a scalar t(z)");
  std::vector<Realization> copies(E.cols(), t);
  return minimal(E * block_diag(copies));
}

Design realize_design(const DcfBundle& d, const QParametrization& p, const Vector& x,
                      const AreaPartition& part) {
  Design out;
  out.x = x;
  out.Q = q_from_x(p, x);
  out.pair = form_nrf_pair(d, out.Q);
  out.bank = build_bank(out.pair.KD, part, &out.rows);
  out.partition = partition_with_bank(part, out.bank);
  out.maps = build_maps(d, out.pair, out.bank);
  return out;
}

namespace {

struct BlockRef {
  BlockKind kind;
  int i = 0, j = 0;
  std::vector<int> rows, cols;
  const std::optional<Realization>* target = nullptr;
};

std::vector<BlockRef> all_blocks(const Design& des, const SynthesisSpec& spec) {
  const AreaPartition& part = des.partition;
  const int N = part.areas();
  std::vector<BlockRef> out;
  for (int i = 0; i < N; ++i) {
    const std::vector<int> rows = area_rows(des.maps, part, i);
    out.push_back({BlockKind::disturbance, i, 0, rows, fq_disturbance_cols(des.maps),
                   &spec.Td[i]});
    for (int j = 0; j < N; ++j)
      out.push_back({BlockKind::coupling, i, j, rows,
                     fq_coupling_cols(des.maps, part, j), &spec.Tu[i][j]});
    for (int j = 0; j < N; ++j)
      out.push_back({BlockKind::init, i, j, rows, iq_area_cols(des.maps, part, j),
                     &spec.Tc[i][j]});
  }
  return out;
}

CMatrix slice(const CMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  CMatrix out(rows.size(), cols.size());
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
  return out;
}

void store(GammaTable& g, const BlockRef& b, double v) {
  switch (b.kind) {
    case BlockKind::disturbance: g.d[b.i] = v; break;
    case BlockKind::coupling: g.u(b.i, b.j) = v; break;
    case BlockKind::init: g.c(b.i, b.j) = v; break;
  }
}

void check_block_target(const BlockRef& b) {
  if (*b.target && ((*b.target)->outputs() != static_cast<int>(b.rows.size()) ||
                    (*b.target)->inputs() != static_cast<int>(b.cols.size())))
    throw Error(ErrorCode::invalid_argument,
                "target for block (" + std::to_string(b.i + 1) + "," +
                    std::to_string(b.j + 1) + ") has the wrong shape");
}

GammaTable norms_on_grid(const Design& des, const SynthesisSpec& spec, int G,
                         bool refine) {
  const int N = des.partition.areas();
  GammaTable g = GammaTable::filled(N, 0.0);
  const FrequencyGrid grid = FrequencyGrid::half_circle(G);
  FrequencyEvaluator evF(des.maps.FQ), evI(des.maps.IQ);
  std::vector<CMatrix> fq(G), iq(G);
  for (int k = 0; k < G; ++k) {
    fq[k] = evF(grid.points[k]);
    iq[k] = evI(grid.points[k]);
  }
  for (const BlockRef& b : all_blocks(des, spec)) {
    check_block_target(b);
    const std::vector<CMatrix>& src = b.kind == BlockKind::init ? iq : fq;
    const FrequencyEvaluator& ev = b.kind == BlockKind::init ? evI : evF;
    std::optional<FrequencyEvaluator> et;
    if (*b.target) et.emplace(**b.target);
    std::vector<double> v(G);
    for (int k = 0; k < G; ++k) {
      CMatrix m = slice(src[k], b.rows, b.cols);
      if (et) m -= (*et)(grid.points[k]);
      v[k] = max_singular_value(m);
    }
    double value = 0.0;
    if (refine) {
      value = refine_sup(v, [&](Complex z) {
                CMatrix m = slice(ev(z), b.rows, b.cols);
                if (et) m -= (*et)(z);
                return m;
              }).value;
    } else {
      for (double s : v) value = std::max(value, s);
    }
    store(g, b, value);
  }
  return g;
}

}  // namespace

GammaTable constraint_norms(const Design& design, const SynthesisSpec& spec,
                            int grid_points) {
  return norms_on_grid(design, spec, grid_points, true);
}

GammaTable constraint_norms(const DcfBundle& d, const QParametrization& p,
                            const Vector& x, const SynthesisSpec& spec,
                            const AreaPartition& part, Design* design) {
  Design des = realize_design(d, p, x, part);
  GammaTable g = constraint_norms(des, spec, spec.optimizer.verify_grid);
  if (design) *design = std::move(des);
  return g;
}

GammaTable sampled_norms(const Design& design, const SynthesisSpec& spec,
                         const FrequencyGrid& grid) {
  if (grid.count() < 1) return GammaTable::filled(design.partition.areas(), 0.0);
  return norms_on_grid(design, spec, grid.count(), false);
}

double objective(const GammaTable& gamma, const SynthesisSpec& spec) {
  double f = 0.0;
  const int N = spec.areas;
  for (int i = 0; i < N; ++i) {
    if (spec.weights.d[i] > 0.0) f += spec.weights.d[i] * gamma.d[i];
    for (int j = 0; j < N; ++j) {
      if (spec.weights.u(i, j) > 0.0) f += spec.weights.u(i, j) * gamma.u(i, j);
      if (spec.weights.c(i, j) > 0.0) f += spec.weights.c(i, j) * gamma.c(i, j);
    }
  }
  return f;
}

std::vector<std::string> bound_hits(const GammaTable& gamma, const GammaTable& bounds,
                                    double rel) {
  std::vector<std::string> out;
  const int N = static_cast<int>(gamma.d.size());
  auto hit = [&](double g, double b) {
    return std::isfinite(b) && g >= b * (1.0 - rel) && (b > 0.0 || g > 0.0);
  };
  auto describe = [](const std::string& name, double g, double b) {
    std::ostringstream os;
    os << name << " = " << g << " at bound " << b;
    return os.str();
  };
  for (int i = 0; i < N; ++i) {
    if (hit(gamma.d[i], bounds.d[i]))
      out.push_back(describe(single_name("gamma_d", i), gamma.d[i], bounds.d[i]));
    for (int j = 0; j < N; ++j) {
      if (hit(gamma.u(i, j), bounds.u(i, j)))
        out.push_back(describe(pair_name("gamma_u", i, j), gamma.u(i, j), bounds.u(i, j)));
      if (hit(gamma.c(i, j), bounds.c(i, j)))
        out.push_back(describe(pair_name("gamma_c", i, j), gamma.c(i, j), bounds.c(i, j)));
    }
  }
  return out;
}

GammaTable bootstrap_bounds(const DcfBundle& d, const QParametrization& p,
                            const SynthesisSpec& spec, const AreaPartition& part) {
  const int N = part.areas();
  switch (spec.bounds_mode) {
    case BoundsMode::none:
      return GammaTable::filled(N, kNoBound);
    case BoundsMode::explicit_values:
      return spec.bounds;
    case BoundsMode::bootstrap:
      break;
  }
  GammaTable g = constraint_norms(d, p, Vector::Zero(p.size()), spec, part);
  g.c.setConstant(kNoBound);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (spec.weights.c(i, j) > 0.0) g.c(i, j) = kNoBound;
  return g;
}

namespace {

// Hermitian m x m matrices are packed as m real diagonal entries followed by
// the (re, im) pairs of the strict upper triangle in row-major order.
int packed_size(int m) { return m + m * (m - 1); }

void pack(const CMatrix& H, double* out) {
  const int m = static_cast<int>(H.rows());
  for (int k = 0; k < m; ++k) out[k] = H(k, k).real();
  int o = m;
  for (int r = 0; r < m; ++r)
    for (int c = r + 1; c < m; ++c) {
      out[o++] = H(r, c).real();
      out[o++] = H(r, c).imag();
    }
}

// Packs A B^H (wide blocks) or A^H B (tall blocks); with `sym` packs the
// Hermitian part times two, i.e. A B^H + B A^H.
void pack_gram(const CMatrix& A, const CMatrix& B, bool wide, bool sym, double* out) {
  const int m = static_cast<int>(wide ? A.rows() : A.cols());
  const int L = static_cast<int>(wide ? A.cols() : A.rows());
  auto entry = [&](const CMatrix& X, const CMatrix& Y, int i, int j) {
    Complex acc = 0.0;
    if (wide)
      for (int l = 0; l < L; ++l) acc += X(i, l) * std::conj(Y(j, l));
    else
      for (int l = 0; l < L; ++l) acc += std::conj(X(l, i)) * Y(l, j);
    return acc;
  };
  auto value = [&](int i, int j) {
    Complex v = entry(A, B, i, j);
    if (sym) v += entry(B, A, i, j);
    return v;
  };
  for (int k = 0; k < m; ++k) out[k] = value(k, k).real();
  int o = m;
  for (int r = 0; r < m; ++r)
    for (int c = r + 1; c < m; ++c) {
      const Complex v = value(r, c);
      out[o++] = v.real();
      out[o++] = v.imag();
    }
}

// Largest eigenvalue of a packed Hermitian matrix; closed forms up to 3 x 3.
double lambda_max(const double* h, int m) {
  if (m == 0) return 0.0;
  if (m == 1) return h[0];
  if (m == 2) {
    const double d = 0.5 * (h[0] - h[1]);
    return 0.5 * (h[0] + h[1]) + std::sqrt(d * d + h[2] * h[2] + h[3] * h[3]);
  }
  if (m == 3) {
    const Complex d(h[3], h[4]), e(h[5], h[6]), f(h[7], h[8]);
    const double p1 = std::norm(d) + std::norm(e) + std::norm(f);
    const double q = (h[0] + h[1] + h[2]) / 3.0;
    const double a1 = h[0] - q, b1 = h[1] - q, c1 = h[2] - q;
    const double p2 = a1 * a1 + b1 * b1 + c1 * c1 + 2.0 * p1;
    if (p2 <= 0.0) return q;
    const double p = std::sqrt(p2 / 6.0);
    const double det = a1 * b1 * c1 - a1 * std::norm(f) - c1 * std::norm(d) -
                       b1 * std::norm(e) + 2.0 * (d * f * std::conj(e)).real();
    const double r = std::clamp(det / (2.0 * p * p * p), -1.0, 1.0);
    return q + 2.0 * p * std::cos(std::acos(r) / 3.0);
  }
  CMatrix H(m, m);
  for (int k = 0; k < m; ++k) H(k, k) = h[k];
  int o = m;
  for (int r = 0; r < m; ++r)
    for (int c = r + 1; c < m; ++c, o += 2) {
      H(r, c) = Complex(h[o], h[o + 1]);
      H(c, r) = std::conj(H(r, c));
    }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// Affine model of the search-relevant columns of F_Q in the parameter x,
// sampled on a fixed grid. Each evaluation along a line costs one small
// Hermitian eigenvalue per block and grid point.
class SearchEngine {
 public:
  SearchEngine(const DcfBundle& d, const QParametrization& p, const SynthesisSpec& spec,
               const AreaPartition& part, const GammaTable& bounds)
      : p_(p), nx_(d.plant.nx()), nu_(d.plant.nu()), nd_(d.plant.nd()) {
    const FrequencyGrid grid = FrequencyGrid::half_circle(spec.optimizer.search_grid);
    z_ = grid.points;
    const int G = grid.count();
    FrequencyEvaluator eP(d.nm()), eYX(d.yx()), eMt(d.Mt), eNt(d.Nt), eGd(d.gd_tilde()),
        eXt(d.Xt), eYt(d.Yt);
    P_.resize(G);
    Mt_.resize(G);
    Nt_.resize(G);
    Gd_.resize(G);
    base_.resize(G);
    for (int g = 0; g < G; ++g) {
      const Complex z = z_[g];
      P_[g] = eP(z);
      Mt_[g] = eMt(z);
      Nt_[g] = eNt(z);
      Gd_[g] = eGd(z);
      const CMatrix Yt = eYt(z);
      CMatrix S(nu_, nx_ + 2 * nu_ + nd_);
      CMatrix off = -Yt;
      off.diagonal() += Yt.diagonal();
      S << eXt(z), Yt, off, CMatrix::Zero(nu_, nd_);
      base_[g] = P_[g] * S;
      base_[g].block(nx_, nx_, nu_, nu_) -= CMatrix::Identity(nu_, nu_);
      base_[g].rightCols(nd_) = eYX(z) * Gd_[g];
    }

    const int N = part.areas();
    auto add = [&](BlockKind kind, int i, int j, double w, double b,
                   const std::optional<Realization>& t) {
      if (!(w > 0.0) && !std::isfinite(b)) return;
      Block blk;
      blk.kind = kind;
      blk.i = i;
      blk.j = j;
      blk.weight = w;
      blk.bound = b;
      blk.rows = part.indices(Signal::x, i);
      for (int k : part.indices(Signal::u, i)) blk.rows.push_back(nx_ + k);
      if (kind == BlockKind::disturbance) {
        for (int k = 0; k < nu_ + nd_; ++k) blk.cols.push_back(nx_ + nu_ + k);
      } else {
        blk.cols = part.indices(Signal::x, j);
        for (int k : part.indices(Signal::u, j)) blk.cols.push_back(nx_ + k);
      }
      blk.target.resize(G);
      std::optional<FrequencyEvaluator> et;
      if (t) et.emplace(*t);
      for (int g = 0; g < G; ++g)
        blk.target[g] = et ? (*et)(z_[g])
                           : CMatrix::Zero(blk.rows.size(), blk.cols.size());
      blocks_.push_back(std::move(blk));
    };
    for (int i = 0; i < N; ++i) {
      add(BlockKind::disturbance, i, 0, spec.weights.d[i], bounds.d[i], spec.Td[i]);
      for (int j = 0; j < N; ++j)
        add(BlockKind::coupling, i, j, spec.weights.u(i, j), bounds.u(i, j), spec.Tu[i][j]);
    }
  }

  int size() const { return p_.size(); }
  int evaluations() const { return evaluations_; }

  double reset(const Vector& x) {
    x_ = x;
    const std::vector<CMatrix> r = response(p_.taps(x));
    cur_.resize(z_.size());
    for (size_t g = 0; g < z_.size(); ++g) cur_[g] = base_[g] + r[g];
    for (Block& b : blocks_) b.base.clear();
    prepare(std::vector<CMatrix>(z_.size(), CMatrix::Zero(cur_[0].rows(), cur_[0].cols())));
    return trial(0.0);
  }

  const Vector& x() const { return x_; }

  // Direction in parameter space; precomputes Gram expansions.
  void set_direction(const Vector& dir) {
    dir_ = dir;
    std::vector<Matrix> taps(p_.q, Matrix::Zero(p_.nu, p_.nx));
    for (int b = 0; b < p_.size(); ++b) {
      if (dir(b) == 0.0) continue;
      for (int t = 0; t < p_.q; ++t) taps[t] += dir(b) * p_.basis[b][t];
    }
    prepare(response(taps));
  }

  double trial(double t) {
    ++evaluations_;
    double f = 0.0;
    std::vector<double> h;
    for (const Block& b : blocks_) {
      const int K = packed_size(b.m);
      h.resize(K);
      double s2 = 0.0;
      const double t2 = t * t;
      for (size_t g = 0; g < z_.size(); ++g) {
        const double* p0 = &b.g0[g * K];
        const double* p1 = &b.g1[g * K];
        const double* p2 = &b.g2[g * K];
        double trace = 0.0;
        for (int k = 0; k < b.m; ++k) {
          h[k] = p0[k] + t * p1[k] + t2 * p2[k];
          trace += h[k];
        }
        if (trace <= s2) continue;
        for (int k = b.m; k < K; ++k) h[k] = p0[k] + t * p1[k] + t2 * p2[k];
        s2 = std::max(s2, lambda_max(h.data(), b.m));
      }
      const double gamma = std::sqrt(std::max(0.0, s2));
      if (gamma > b.bound * (1.0 + 1e-12) + 1e-15)
        return std::numeric_limits<double>::infinity();
      if (b.weight > 0.0) f += b.weight * gamma;
    }
    return f;
  }

  void accept(double t) {
    x_ += t * dir_;
    for (size_t g = 0; g < z_.size(); ++g) cur_[g] += t * dirresp_[g];
    for (Block& b : blocks_) {
      for (size_t g = 0; g < z_.size(); ++g) b.base[g] += t * b.dir[g];
      b.dirty = true;
    }
  }

 private:
  struct Block {
    BlockKind kind;
    int i = 0, j = 0;
    double weight = 0.0, bound = kNoBound;
    std::vector<int> rows, cols;
    std::vector<CMatrix> target;
    int m = 0;  // side of the Gram matrices
    std::vector<CMatrix> base, dir;  // block of F_Q - target, and of the direction
    bool dirty = true;
    std::vector<double> g0, g1, g2;
  };

  std::vector<CMatrix> response(const std::vector<Matrix>& taps) const {
    std::vector<CMatrix> out(z_.size());
    for (size_t g = 0; g < z_.size(); ++g) {
      const Complex zi = 1.0 / z_[g];
      CMatrix Qz = CMatrix::Zero(nu_, nx_);
      Complex pw = zi;
      for (int t = 0; t < p_.q; ++t, pw *= zi) Qz += pw * taps[t].cast<Complex>();
      const CMatrix QN = Qz * Nt_[g];
      CMatrix S(nu_, nx_ + 2 * nu_ + nd_);
      CMatrix off = -QN;
      off.diagonal() += QN.diagonal();
      S << Qz * Mt_[g], QN, off, Qz * Gd_[g];
      out[g] = P_[g] * S;
    }
    return out;
  }

  void prepare(std::vector<CMatrix> dirresp) {
    dirresp_ = std::move(dirresp);
    const int G = static_cast<int>(z_.size());
    for (Block& b : blocks_) {
      const bool wide = b.rows.size() <= b.cols.size();
      b.m = static_cast<int>(wide ? b.rows.size() : b.cols.size());
      const int K = packed_size(b.m);
      b.g1.resize(G * K);
      b.g2.resize(G * K);
      b.dir.resize(G);
      if (b.base.size() != static_cast<size_t>(G)) {
        b.base.resize(G);
        for (int g = 0; g < G; ++g) b.base[g] = slice(cur_[g], b.rows, b.cols) - b.target[g];
        b.dirty = true;
      }
      if (b.dirty) {
        b.g0.resize(G * K);
        for (int g = 0; g < G; ++g) pack_gram(b.base[g], b.base[g], wide, false, &b.g0[g * K]);
        b.dirty = false;
      }
      for (int g = 0; g < G; ++g) {
        b.dir[g] = slice(dirresp_[g], b.rows, b.cols);
        pack_gram(b.base[g], b.dir[g], wide, true, &b.g1[g * K]);
        pack_gram(b.dir[g], b.dir[g], wide, false, &b.g2[g * K]);
      }
    }
  }

  const QParametrization& p_;
  int nx_, nu_, nd_;
  std::vector<Complex> z_;
  std::vector<CMatrix> P_, Mt_, Nt_, Gd_, base_, cur_, dirresp_;
  std::vector<Block> blocks_;
  Vector x_, dir_;
  int evaluations_ = 0;
};

struct LineResult {
  double t = 0.0;
  double f = 0.0;
};

// Bracketing followed by golden-section search; never returns a point worse
// than t = 0.
LineResult line_search(SearchEngine& e, double f0, double h, double xtol) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  LineResult best{0.0, f0};
  auto eval = [&](double t) {
    const double f = e.trial(t);
    if (f < best.f) best = {t, f};
    return f;
  };
  // Walks from 0 through `first` (already known to descend) until the value
  // rises; returns the bracket as (a, c).
  auto expand = [&](double first, double f_first, double& lo, double& hi) {
    double a = 0.0, b = first, fb = f_first;
    for (int it = 0; it < 60; ++it) {
      const double c = b + (b - a) / phi;
      const double fc = eval(c);
      if (fc >= fb) {
        lo = std::min(a, c);
        hi = std::max(a, c);
        return true;
      }
      a = b;
      b = c;
      fb = fc;
    }
    return false;
  };
  double lo = -h, hi = h;
  const double fp = eval(h);
  if (fp < f0) {
    if (!expand(h, fp, lo, hi)) return best;
  } else {
    const double fm = eval(-h);
    if (fm < f0 && !expand(-h, fm, lo, hi)) return best;
  }
  double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
  double fc = eval(c), fd = eval(d);
  while (hi - lo > xtol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - phi * (hi - lo);
      fc = eval(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + phi * (hi - lo);
      fd = eval(d);
    }
  }
  return best;
}

struct RunResult {
  Vector x;
  double f = 0.0;
  std::vector<double> log;
  int sweeps = 0;
};

RunResult pattern_search(SearchEngine& e, const Vector& start, const OptimizerSettings& o) {
  RunResult out;
  double f = e.reset(start);
  out.log.push_back(f);
  const int n = e.size();
  if (!std::isfinite(f) || n == 0) {
    out.x = start;
    out.f = f;
    return out;
  }
  Vector step = Vector::Constant(n, o.initial_step);
  const double xtol = 1e-7;
  for (int sweep = 0; sweep < o.max_sweeps; ++sweep) {
    const double f_start = f;
    const Vector x_start = e.x();
    for (int b = 0; b < n; ++b) {
      e.set_direction(Vector::Unit(n, b));
      const LineResult r = line_search(e, f, step(b), xtol);
      if (r.f < f) {
        e.accept(r.t);
        f = r.f;
        out.log.push_back(f);
        step(b) = std::max(2.0 * std::abs(r.t), 1e-4);
      } else {
        step(b) = std::max(0.5 * step(b), 1e-4);
      }
    }
    const Vector move = e.x() - x_start;
    if (move.norm() > 0.0) {
      e.set_direction(move);
      const LineResult r = line_search(e, f, 1.0, 1e-6);
      if (r.f < f) {
        e.accept(r.t);
        f = r.f;
        out.log.push_back(f);
      }
    }
    ++out.sweeps;
    if (f_start - f < o.tol) break;
  }
  out.x = e.x();
  out.f = f;
  return out;
}

}  // namespace

SynthesisResult solve(const SynthesisSpec& spec, const DcfBundle& d,
                      const QParametrization& p, const AreaPartition& part) {
  spec.validate(part, full_neighborhoods(part.areas()), d.plant.nd());
  const OptimizerSettings& o = spec.optimizer;
  SynthesisResult res;
  res.bounds = bootstrap_bounds(d, p, spec, part);
  for (int i = 0; i < spec.areas; ++i)
    for (int j = 0; j < spec.areas; ++j)
      if (spec.weights.c(i, j) > 0.0 || std::isfinite(res.bounds.c(i, j)))
        throw Error(ErrorCode::invalid_argument,
                    "initial-condition constraints are evaluated post hoc only; set "
                    "their weights to 0 and leave them unbounded");

  SearchEngine engine(d, p, spec, part, res.bounds);
  const int n = p.size();
  RunResult best;
  bool have = false;
  std::mt19937_64 gen(o.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int s = 0; s < std::max(1, o.starts); ++s) {
    Vector x0 = Vector::Zero(n);
    if (s > 0)
      for (int k = 0; k < n; ++k) x0(k) = o.perturbation * gauss(gen);
    RunResult r = pattern_search(engine, x0, o);
    if (s == 0 && !std::isfinite(r.f))
      throw Error(ErrorCode::invalid_argument,
                  "bounds are violated at x = 0; relax the bounds or use the bootstrap");
    res.start_logs.push_back(r.log);
    res.sweeps += r.sweeps;
    if (std::isfinite(r.f) && (!have || r.f < best.f - o.tol)) {
      best = std::move(r);
      have = true;
    }
  }
  res.x = best.x;
  res.log = best.log;
  res.search_objective = best.f;
  res.evaluations = engine.evaluations();
  res.gamma = constraint_norms(d, p, res.x, spec, part, &res.design);
  res.objective = objective(res.gamma, spec);
  res.bound_hits = bound_hits(res.gamma, res.bounds);
  return res;
}

const char* to_string(DesignStatus s) {
  switch (s) {
    case DesignStatus::ok: return "ok";
    case DesignStatus::factorization_failed: return "factorization_failed";
    case DesignStatus::sparsity_infeasible: return "sparsity_infeasible";
    case DesignStatus::bounds_infeasible: return "bounds_infeasible";
  }
  return "unknown";
}

DesignReport run_algorithm1(const Plant& plant, const AreaPartition& part,
                            const Neighborhoods& nb, SynthesisSpec spec,
                            const AlgorithmConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  DesignReport rep;
  auto finish = [&]() {
    rep.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  };
  plant.validate();
  validate_neighborhoods(nb, part.areas());
  spec.validate(part, nb, plant.nd());

  try {
    const Gains gains = design_gains(plant, part, config.strategy,
                                     config.gains ? &*config.gains : nullptr);
    rep.dcf = build_dcf(plant, gains.F, gains.L, config.dcf_grid);
    if (!rep.dcf->left_fir_degree)
      throw Error(ErrorCode::non_fir, "A + L is not nilpotent");
  } catch (const Error& e) {
    rep.status = DesignStatus::factorization_failed;
    rep.message = std::string(to_string(e.code())) + ": " + e.what();
    return finish();
  }
  const DcfBundle& d = *rep.dcf;

  rep.pattern = pattern_from_neighborhoods(part, nb);
  rep.param = parametrize(d, rep.pattern, config.q, &rep.particular);
  if (!rep.particular.feasible) {
    rep.status = DesignStatus::sparsity_infeasible;
    rep.message = rep.particular.message;
    rep.hints.push_back(
        "choose a more compact area distribution (merge strongly coupled areas or "
        "enlarge the neighborhoods), or raise q");
    return finish();
  }

  const GammaTable bounds = bootstrap_bounds(d, rep.param, spec, part);
  if (spec.bounds_mode == BoundsMode::explicit_values) {
    const GammaTable g0 =
        constraint_norms(d, rep.param, Vector::Zero(rep.param.size()), spec, part);
    std::vector<std::string> over;
    for (const std::string& h : bound_hits(g0, bounds, 0.0)) over.push_back(h);
    bool violated = false;
    for (int i = 0; i < spec.areas && !violated; ++i) {
      violated = g0.d[i] > bounds.d[i];
      for (int j = 0; j < spec.areas; ++j)
        violated = violated || g0.u(i, j) > bounds.u(i, j) || g0.c(i, j) > bounds.c(i, j);
    }
    if (violated) {
      rep.status = DesignStatus::bounds_infeasible;
      rep.message = "the bounds are violated by the bootstrap point x = 0";
      rep.hints = over;
      rep.hints.push_back("relax the violated bounds or revise the targets");
      return finish();
    }
  }
  spec.bounds = bounds;
  spec.bounds_mode = BoundsMode::explicit_values;
  rep.result = solve(spec, d, rep.param, part);
  for (const std::string& h : rep.result->bound_hits)
    rep.hints.push_back(h + "; revise the targets or relax this bound");
  return finish();
}

}  // namespace nrf
