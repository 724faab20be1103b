#include "nrf/dcf.hpp"

#include <cmath>
#include <sstream>

namespace nrf {

void Plant::validate() const {
  if (A.rows() != A.cols())
    throw Error(ErrorCode::dimension_mismatch, "plant: A must be square");
  if (Bu.rows() != A.rows())
    throw Error(ErrorCode::dimension_mismatch, "plant: rows(B_u) != rows(A)");
  if (Bd.rows() != A.rows())
    throw Error(ErrorCode::dimension_mismatch, "plant: rows(B_d) != rows(A)");
  if (Bu.cols() == 0)
    throw Error(ErrorCode::dimension_mismatch, "plant: no control inputs");
}

Realization Plant::gu() const {
  return Realization(A, Bu, Matrix::Identity(nx(), nx()), Matrix::Zero(nx(), nu()));
}

Realization Plant::gd() const {
  return Realization(A, Bd, Matrix::Identity(nx(), nx()), Matrix::Zero(nx(), nd()));
}

GainStrategy parse_gain_strategy(const std::string& name) {
  if (name == "block_diagonalizing_F_deadbeat_L")
    return GainStrategy::block_diagonalizing_F_deadbeat_L;
  if (name == "lqr_F_deadbeat_L") return GainStrategy::lqr_F_deadbeat_L;
  if (name == "user_supplied") return GainStrategy::user_supplied;
  throw Error(ErrorCode::config, "unknown gain strategy '" + name + "'");
}

std::string to_string(GainStrategy s) {
  switch (s) {
    case GainStrategy::block_diagonalizing_F_deadbeat_L:
      return "block_diagonalizing_F_deadbeat_L";
    case GainStrategy::lqr_F_deadbeat_L: return "lqr_F_deadbeat_L";
    case GainStrategy::user_supplied: return "user_supplied";
  }
  return "unknown";
}

std::optional<int> nilpotency_index(const Matrix& A, double tol) {
  const int n = static_cast<int>(A.rows());
  if (n == 0) return 0;
  const double scale = 1.0 + A.norm();
  Matrix P = Matrix::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    P = P * A;
    if (P.norm() <= tol * std::pow(scale, k)) return k;
  }
  return std::nullopt;
}

namespace {

// Nilpotent matrix A_ii + b k for a controllable single-input pair, via
// Ackermann's formula with every closed-loop pole at the origin.
std::optional<Matrix> deadbeat_block(const Matrix& Aii, const Matrix& Bii) {
  const int n = static_cast<int>(Aii.rows());
  for (int c = 0; c < Bii.cols(); ++c) {
    const Vector b = Bii.col(c);
    Matrix ctrb(n, n);
    Vector v = b;
    for (int k = 0; k < n; ++k) {
      ctrb.col(k) = v;
      v = Aii * v;
    }
    Eigen::JacobiSVD<Matrix> svd(ctrb);
    const Vector& s = svd.singularValues();
    if (s(n - 1) <= 1e-8 * s(0)) continue;
    Matrix An = Matrix::Identity(n, n);
    for (int k = 0; k < n; ++k) An = An * Aii;
    Vector en = Vector::Zero(n);
    en(n - 1) = 1.0;
    const Matrix k_row =
        en.transpose() * ctrb.fullPivLu().solve(Matrix::Identity(n, n)) * An;
    Matrix D = Aii - b * k_row;
    if (nilpotency_index(D, 1e-9)) return D;
  }
  return std::nullopt;
}

Matrix dare_gain(const Matrix& A, const Matrix& B) {
  const int n = static_cast<int>(A.rows()), m = static_cast<int>(B.cols());
  const Matrix Qw = Matrix::Identity(n, n), Rw = Matrix::Identity(m, m);
  Matrix P = Qw;
  for (int it = 0; it < 20000; ++it) {
    const Matrix S = Rw + B.transpose() * P * B;
    const Matrix K = S.ldlt().solve(B.transpose() * P * A);
    Matrix Pn = Qw + A.transpose() * P * A - A.transpose() * P * B * K;
    Pn = 0.5 * (Pn + Pn.transpose());
    const double delta = (Pn - P).norm();
    P = std::move(Pn);
    if (delta <= 1e-13 * (1.0 + P.norm())) break;
  }
  const Matrix S = Rw + B.transpose() * P * B;
  return S.ldlt().solve(B.transpose() * P * A);
}

}  // namespace

void check_cb_controllable(const Plant& plant) {
  const Realization r(plant.A, plant.Bu, Matrix::Identity(plant.nx(), plant.nx()),
                      Matrix::Zero(plant.nx(), plant.nu()));
  for (const Complex& l : eigenvalues(plant.A)) {
    if (std::abs(l) < 1.0) continue;
    if (!pbh_test(r, l, PbhMode::controllable)) {
      std::ostringstream os;
      os << "(A, B_u) is not controllable at the unstable eigenvalue " << l;
      throw Error(ErrorCode::uncontrollable_mode, os.str());
    }
  }
}

Matrix deadbeat_observer_gain(const Plant& plant, const AreaPartition& part) {
  const int n = plant.nx();
  Matrix target = Matrix::Zero(n, n);
  for (int i = 0; i < part.areas(); ++i) {
    const int ox = part.offset(Signal::x, i), nx = part.size(Signal::x, i);
    const int ou = part.offset(Signal::u, i), nu = part.size(Signal::u, i);
    const Matrix Aii = plant.A.block(ox, ox, nx, nx);
    const Matrix Bii = plant.Bu.block(ox, ou, nx, nu);
    if (auto D = deadbeat_block(Aii, Bii)) target.block(ox, ox, nx, nx) = *D;
  }
  return target - plant.A;
}

Gains design_gains(const Plant& plant, const AreaPartition& part,
                   GainStrategy strategy, const Gains* user) {
  plant.validate();
  if (part.total(Signal::x) != plant.nx() || part.total(Signal::u) != plant.nu())
    throw Error(ErrorCode::dimension_mismatch,
                "partition sizes do not cover the plant dimensions");
  check_cb_controllable(plant);
  Gains g;
  switch (strategy) {
    case GainStrategy::block_diagonalizing_F_deadbeat_L: {
      Matrix Adiag = Matrix::Zero(plant.nx(), plant.nx());
      for (int i = 0; i < part.areas(); ++i) {
        const int o = part.offset(Signal::x, i), s = part.size(Signal::x, i);
        Adiag.block(o, o, s, s) = plant.A.block(o, o, s, s);
      }
      const Matrix BtB = plant.Bu.transpose() * plant.Bu;
      g.F = BtB.ldlt().solve(plant.Bu.transpose() * (Adiag - plant.A));
      g.L = deadbeat_observer_gain(plant, part);
      break;
    }
    case GainStrategy::lqr_F_deadbeat_L:
      g.F = -dare_gain(plant.A, plant.Bu);
      g.L = deadbeat_observer_gain(plant, part);
      break;
    case GainStrategy::user_supplied:
      if (user == nullptr)
        throw Error(ErrorCode::invalid_argument, "user_supplied gains missing");
      g = *user;
      break;
  }
  if (g.F.rows() != plant.nu() || g.F.cols() != plant.nx() ||
      g.L.rows() != plant.nx() || g.L.cols() != plant.nx())
    throw Error(ErrorCode::dimension_mismatch, "gain dimensions do not match plant");
  const double rf = spectral_radius(Matrix(plant.A + plant.Bu * g.F));
  const double rl = spectral_radius(Matrix(plant.A + g.L));
  if (rf >= 1.0 || rl >= 1.0) {
    std::ostringstream os;
    os << "gains are not stabilizing: rho(A + B_u F) = " << rf
       << ", rho(A + L) = " << rl << "; supply gains with strategy user_supplied";
    throw Error(ErrorCode::non_stabilizing, os.str());
  }
  return g;
}

Realization DcfBundle::gd_tilde() const {
  const int n = plant.nx();
  return Realization(plant.A + L, plant.Bd, Matrix::Identity(n, n),
                     Matrix::Zero(n, plant.nd()));
}

Realization DcfBundle::j1() const {
  const int n = plant.nx();
  const Matrix Al = plant.A + L;
  return Realization(Al, Al, Matrix::Identity(n, n), Matrix::Identity(n, n));
}

Realization DcfBundle::nm() const {
  const int n = plant.nx(), m = plant.nu();
  Matrix C(n + m, n), D = Matrix::Zero(n + m, m);
  C << Matrix::Identity(n, n), F;
  D.bottomRows(m).setIdentity();
  return Realization(plant.A + plant.Bu * F, plant.Bu, std::move(C), std::move(D));
}

Realization DcfBundle::yx() const {
  const int n = plant.nx(), m = plant.nu();
  Matrix C(n + m, n), D = Matrix::Zero(n + m, n);
  C << Matrix::Identity(n, n), F;
  D.topRows(n).setIdentity();
  return Realization(plant.A + plant.Bu * F, -L, std::move(C), std::move(D));
}

double verify_bezout(const DcfBundle& d, const FrequencyGrid& grid) {
  const int n = d.plant.nx(), m = d.plant.nu();
  FrequencyEvaluator eM(d.M), eN(d.N), eX(d.X), eY(d.Y);
  FrequencyEvaluator eMt(d.Mt), eNt(d.Nt), eXt(d.Xt), eYt(d.Yt);
  const CMatrix I = CMatrix::Identity(n + m, n + m);
  double worst = 0.0;
  for (const Complex& z : grid.points) {
    CMatrix left(n + m, n + m), right(n + m, n + m);
    left << eYt(z), -eXt(z), -eNt(z), eMt(z);
    right << eM(z), eX(z), eN(z), eY(z);
    worst = std::max(worst, max_singular_value(left * right - I));
  }
  return worst;
}

DcfBundle build_dcf(const Plant& plant, const Matrix& F, const Matrix& L,
                    int grid_points) {
  plant.validate();
  const int n = plant.nx(), m = plant.nu();
  if (F.rows() != m || F.cols() != n || L.rows() != n || L.cols() != n)
    throw Error(ErrorCode::dimension_mismatch, "build_dcf: gain dimensions");
  const Matrix& A = plant.A;
  const Matrix& B = plant.Bu;
  const Matrix Af = A + B * F, Al = A + L;
  if (spectral_radius(Af) >= 1.0 || spectral_radius(Al) >= 1.0)
    throw Error(ErrorCode::non_stabilizing,
                "build_dcf: A + B_u F and A + L must both be stable");
  const Matrix In = Matrix::Identity(n, n), Im = Matrix::Identity(m, m);
  const Matrix Znm = Matrix::Zero(n, m), Zmn = Matrix::Zero(m, n);

  DcfBundle d;
  d.plant = plant;
  d.F = F;
  d.L = L;
  d.M = Realization(Af, B, F, Im);
  d.N = Realization(Af, B, In, Znm);
  d.X = Realization(Af, -L, F, Zmn);
  d.Y = Realization(Af, -L, In, In);
  d.Yt = Realization(Al, -B, F, Im);
  d.Xt = Realization(Al, -L, F, Zmn);
  d.Nt = Realization(Al, B, In, Znm);
  d.Mt = Realization(Al, L, In, In);

  if (d.Yt.D() != Im || !d.Xt.D().isZero(0.0))
    throw Error(ErrorCode::normalization,
                "factorization violates Yt(inf) = I, Xt(inf) = 0");
  if (!d.N.D().isZero(0.0) || !d.Nt.D().isZero(0.0))
    throw Error(ErrorCode::normalization, "N and Nt must be strictly proper");

  d.grid_size = grid_points;
  d.bezout_residual = verify_bezout(d, FrequencyGrid::unit_circle(grid_points));
  if (!(d.bezout_residual <= kBezoutTol)) {
    std::ostringstream os;
    os << "Bezout residual " << d.bezout_residual << " exceeds " << kBezoutTol;
    throw Error(ErrorCode::bezout_residual, os.str());
  }
  d.left_fir_degree = nilpotency_index(Al);
  d.right_fir_degree = nilpotency_index(Af);
  return d;
}

}  // namespace nrf
