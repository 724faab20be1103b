#include "nrf/lti.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace nrf {

namespace {

std::string dims(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

[[noreturn]] void mismatch(const std::string& what) {
  throw Error(ErrorCode::dimension_mismatch, "dimension mismatch: " + what);
}

Matrix blkdiag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

double norm2(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

// Orthonormal basis of the smallest A-invariant subspace containing range(B).
Matrix reachable_basis(const Matrix& A, const Matrix& B, double tol) {
  const Eigen::Index n = A.rows();
  Matrix V(n, 0);
  Matrix W = B;
  while (V.cols() < n && W.cols() > 0) {
    for (int pass = 0; pass < 2 && V.cols() > 0; ++pass) {
      W -= V * (V.transpose() * W);
    }
    Eigen::JacobiSVD<Matrix> svd(W, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > tol) ++r;
    r = std::min<Eigen::Index>(r, n - V.cols());
    if (r == 0) break;
    Matrix U = svd.matrixU().leftCols(r);
    Matrix next(n, V.cols() + r);
    next << V, U;
    V = std::move(next);
    W = A * U;
  }
  return V;
}

}  // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::singular_resolvent: return "singular_resolvent";
    case ErrorCode::non_invertible_feedthrough: return "non_invertible_feedthrough";
    case ErrorCode::unbounded: return "unbounded";
    case ErrorCode::uncontrollable_mode: return "uncontrollable_mode";
    case ErrorCode::non_stabilizing: return "non_stabilizing";
    case ErrorCode::bezout_residual: return "bezout_residual";
    case ErrorCode::normalization: return "normalization";
    case ErrorCode::not_strictly_proper: return "not_strictly_proper";
    case ErrorCode::singular_diagonal: return "singular_diagonal";
    case ErrorCode::inheritance_violation: return "inheritance_violation";
    case ErrorCode::comm_violation: return "comm_violation";
    case ErrorCode::non_fir: return "non_fir";
    case ErrorCode::algebraic_loop: return "algebraic_loop";
    case ErrorCode::unavailable_message: return "unavailable_message";
    case ErrorCode::nonzero_feedthrough: return "nonzero_feedthrough";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

Realization::Realization(Matrix A, Matrix B, Matrix C, Matrix D,
                         StabilityDomain domain)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_(std::move(D)),
      domain_(domain) {
  if (A_.rows() != A_.cols()) mismatch("A is " + dims(A_) + ", must be square");
  if (B_.rows() != A_.rows())
    mismatch("rows(B) of " + dims(B_) + " vs rows(A) of " + dims(A_));
  if (C_.cols() != A_.cols())
    mismatch("cols(C) of " + dims(C_) + " vs cols(A) of " + dims(A_));
  if (D_.rows() != C_.rows())
    mismatch("rows(D) of " + dims(D_) + " vs rows(C) of " + dims(C_));
  if (D_.cols() != B_.cols())
    mismatch("cols(D) of " + dims(D_) + " vs cols(B) of " + dims(B_));
}

Realization Realization::gain(const Matrix& D) {
  return Realization(Matrix(0, 0), Matrix(0, D.cols()), Matrix(D.rows(), 0), D);
}

Realization Realization::zero(int outputs, int inputs) {
  return gain(Matrix::Zero(outputs, inputs));
}

Realization Realization::identity(int n) { return gain(Matrix::Identity(n, n)); }

Realization Realization::delay(int n) {
  return Realization(Matrix::Zero(n, n), Matrix::Identity(n, n),
                     Matrix::Identity(n, n), Matrix::Zero(n, n));
}

CMatrix Realization::eval(Complex z) const { return FrequencyEvaluator(*this)(z); }

Realization make_realization(Matrix A, Matrix B, Matrix C, Matrix D) {
  return Realization(std::move(A), std::move(B), std::move(C), std::move(D));
}

FrequencyEvaluator::FrequencyEvaluator(const Realization& r)
    : D_(r.D()), A_(r.A()) {
  if (r.order() == 0) return;
  Eigen::HessenbergDecomposition<Matrix> hess(r.A());
  H_ = hess.matrixH();
  Matrix Q = hess.matrixQ();
  Bt_ = Q.transpose() * r.B();
  Ct_ = r.C() * Q;
  scale_ = 1.0 + r.A().norm();
}

CMatrix FrequencyEvaluator::operator()(Complex z) const {
  CMatrix out = D_.cast<Complex>();
  const Eigen::Index n = H_.rows();
  if (n == 0) return out;
  CMatrix M = -H_.cast<Complex>();
  M.diagonal().array() += z;
  CMatrix X = Bt_.cast<Complex>();
  const double tiny = 1e-14 * (scale_ + std::abs(z));
  auto fail = [&]() {
    CMatrix zi = -A_.cast<Complex>();
    zi.diagonal().array() += z;
    Eigen::JacobiSVD<CMatrix> svd(zi);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    std::ostringstream os;
    os << "resolvent (zI - A) is singular at z = " << z
       << "; min singular value " << smin;
    throw SingularResolventError(smin, os.str());
  };
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (std::abs(M(k + 1, k)) > std::abs(M(k, k))) {
      M.row(k).segment(k, n - k).swap(M.row(k + 1).segment(k, n - k));
      X.row(k).swap(X.row(k + 1));
    }
    if (std::abs(M(k, k)) <= tiny) fail();
    const Complex l = M(k + 1, k) / M(k, k);
    if (l != Complex(0.0)) {
      M.row(k + 1).segment(k, n - k) -= l * M.row(k).segment(k, n - k);
      X.row(k + 1) -= l * X.row(k);
    }
  }
  if (std::abs(M(n - 1, n - 1)) <= tiny) fail();
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    if (k + 1 < n) X.row(k) -= M.row(k).segment(k + 1, n - k - 1) * X.bottomRows(n - k - 1);
    X.row(k) /= M(k, k);
  }
  out.noalias() += Ct_.cast<Complex>() * X;
  return out;
}

FrequencyGrid FrequencyGrid::unit_circle(int count) {
  FrequencyGrid g;
  g.points.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double th = 2.0 * std::numbers::pi * k / count;
    g.points.push_back(std::polar(1.0, th));
  }
  return g;
}

FrequencyGrid FrequencyGrid::half_circle(int count) {
  FrequencyGrid g;
  g.points.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double th = count == 1 ? 0.0 : std::numbers::pi * k / (count - 1);
    g.points.push_back(std::polar(1.0, th));
  }
  return g;
}

FrequencyGrid FrequencyGrid::chebyshev(int count) {
  FrequencyGrid g;
  g.points.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double c = std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * count));
    g.points.push_back(std::polar(1.0, 0.5 * std::numbers::pi * (1.0 - c)));
  }
  return g;
}

Realization operator*(const Realization& L, const Realization& R) {
  if (L.inputs() != R.outputs())
    mismatch("product: left has " + std::to_string(L.inputs()) +
             " inputs, right has " + std::to_string(R.outputs()) + " outputs");
  const int nr = R.order(), nl = L.order();
  Matrix A = Matrix::Zero(nr + nl, nr + nl);
  A.topLeftCorner(nr, nr) = R.A();
  A.bottomLeftCorner(nl, nr) = L.B() * R.C();
  A.bottomRightCorner(nl, nl) = L.A();
  Matrix B(nr + nl, R.inputs());
  B << R.B(), L.B() * R.D();
  Matrix C(L.outputs(), nr + nl);
  C << L.D() * R.C(), L.C();
  return Realization(std::move(A), std::move(B), std::move(C), L.D() * R.D());
}

Realization operator*(const Matrix& left, const Realization& r) {
  if (left.cols() != r.outputs())
    mismatch("gain product: " + dims(left) + " times " +
             std::to_string(r.outputs()) + " outputs");
  return Realization(r.A(), r.B(), left * r.C(), left * r.D());
}

Realization operator*(const Realization& r, const Matrix& right) {
  if (right.rows() != r.inputs())
    mismatch("gain product: " + std::to_string(r.inputs()) + " inputs times " +
             dims(right));
  return Realization(r.A(), r.B() * right, r.C(), r.D() * right);
}

Realization operator+(const Realization& a, const Realization& b) {
  if (a.inputs() != b.inputs() || a.outputs() != b.outputs())
    mismatch("sum of " + dims(a.D()) + " and " + dims(b.D()));
  Matrix B(a.order() + b.order(), a.inputs());
  B << a.B(), b.B();
  Matrix C(a.outputs(), a.order() + b.order());
  C << a.C(), b.C();
  return Realization(blkdiag(a.A(), b.A()), std::move(B), std::move(C),
                     a.D() + b.D());
}

Realization operator-(const Realization& a) {
  return Realization(a.A(), a.B(), -a.C(), -a.D());
}

Realization operator-(const Realization& a, const Realization& b) { return a + (-b); }

Realization operator*(double s, const Realization& r) {
  return Realization(r.A(), r.B(), s * r.C(), s * r.D());
}

Realization series(const Realization& first, const Realization& then) {
  return then * first;
}

Realization parallel(const Realization& a, const Realization& b) { return a + b; }

Realization transpose(const Realization& r) {
  return Realization(r.A().transpose(), r.C().transpose(), r.B().transpose(),
                     r.D().transpose());
}

Realization stack_rows(const std::vector<Realization>& parts) {
  if (parts.empty()) return Realization();
  const int m = parts.front().inputs();
  int n = 0, p = 0;
  for (const auto& r : parts) {
    if (r.inputs() != m) mismatch("stack_rows: input counts differ");
    n += r.order();
    p += r.outputs();
  }
  Matrix A = Matrix::Zero(n, n), B(n, m), C = Matrix::Zero(p, n), D(p, m);
  int on = 0, op = 0;
  for (const auto& r : parts) {
    A.block(on, on, r.order(), r.order()) = r.A();
    B.middleRows(on, r.order()) = r.B();
    C.block(op, on, r.outputs(), r.order()) = r.C();
    D.middleRows(op, r.outputs()) = r.D();
    on += r.order();
    op += r.outputs();
  }
  return Realization(std::move(A), std::move(B), std::move(C), std::move(D));
}

Realization stack_cols(const std::vector<Realization>& parts) {
  if (parts.empty()) return Realization();
  const int p = parts.front().outputs();
  int n = 0, m = 0;
  for (const auto& r : parts) {
    if (r.outputs() != p) mismatch("stack_cols: output counts differ");
    n += r.order();
    m += r.inputs();
  }
  Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, m), C(p, n), D(p, m);
  int on = 0, om = 0;
  for (const auto& r : parts) {
    A.block(on, on, r.order(), r.order()) = r.A();
    B.block(on, om, r.order(), r.inputs()) = r.B();
    C.middleCols(on, r.order()) = r.C();
    D.middleCols(om, r.inputs()) = r.D();
    on += r.order();
    om += r.inputs();
  }
  return Realization(std::move(A), std::move(B), std::move(C), std::move(D));
}

Realization block_diag(const std::vector<Realization>& parts) {
  int n = 0, m = 0, p = 0;
  for (const auto& r : parts) {
    n += r.order();
    m += r.inputs();
    p += r.outputs();
  }
  Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, m), C = Matrix::Zero(p, n),
         D = Matrix::Zero(p, m);
  int on = 0, om = 0, op = 0;
  for (const auto& r : parts) {
    A.block(on, on, r.order(), r.order()) = r.A();
    B.block(on, om, r.order(), r.inputs()) = r.B();
    C.block(op, on, r.outputs(), r.order()) = r.C();
    D.block(op, om, r.outputs(), r.inputs()) = r.D();
    on += r.order();
    om += r.inputs();
    op += r.outputs();
  }
  return Realization(std::move(A), std::move(B), std::move(C), std::move(D));
}

Realization select_rows(const Realization& r, const std::vector<int>& rows) {
  Matrix C(rows.size(), r.order()), D(rows.size(), r.inputs());
  for (size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= r.outputs())
      mismatch("select_rows: row " + std::to_string(rows[k]) + " out of " +
               std::to_string(r.outputs()));
    C.row(k) = r.C().row(rows[k]);
    D.row(k) = r.D().row(rows[k]);
  }
  return Realization(r.A(), r.B(), std::move(C), std::move(D));
}

Realization select_cols(const Realization& r, const std::vector<int>& cols) {
  Matrix B(r.order(), cols.size()), D(r.outputs(), cols.size());
  for (size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] < 0 || cols[k] >= r.inputs())
      mismatch("select_cols: column " + std::to_string(cols[k]) + " out of " +
               std::to_string(r.inputs()));
    B.col(k) = r.B().col(cols[k]);
    D.col(k) = r.D().col(cols[k]);
  }
  return Realization(r.A(), std::move(B), r.C(), std::move(D));
}

Realization row_block(const Realization& r, int start, int count) {
  if (start < 0 || count < 0 || start + count > r.outputs())
    mismatch("row_block out of range");
  return Realization(r.A(), r.B(), r.C().middleRows(start, count),
                     r.D().middleRows(start, count));
}

Realization col_block(const Realization& r, int start, int count) {
  if (start < 0 || count < 0 || start + count > r.inputs())
    mismatch("col_block out of range");
  return Realization(r.A(), r.B().middleCols(start, count), r.C(),
                     r.D().middleCols(start, count));
}

Realization inverse(const Realization& r, double max_condition) {
  if (r.inputs() != r.outputs())
    throw Error(ErrorCode::non_invertible_feedthrough,
                "inverse: feedthrough " + dims(r.D()) + " is not square");
  if (r.inputs() == 0) return r;
  Eigen::JacobiSVD<Matrix> svd(r.D());
  const Vector& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0) || s(0) / smin > max_condition) {
    std::ostringstream os;
    os << "inverse: feedthrough is singular or ill-conditioned (min singular "
          "value "
       << smin << "); the inverse would not be proper";
    throw Error(ErrorCode::non_invertible_feedthrough, os.str());
  }
  const Matrix Di = r.D().inverse();
  return Realization(r.A() - r.B() * Di * r.C(), r.B() * Di, -Di * r.C(), Di);
}

Realization minimal(const Realization& r, double rank_tol) {
  if (r.order() == 0) return r;
  const double tol_c = rank_tol * (1.0 + std::max(norm2(r.A()), norm2(r.B())));
  const Matrix V = reachable_basis(r.A(), r.B(), tol_c);
  if (V.cols() == 0) return Realization::gain(r.D());
  const Matrix Ac = V.transpose() * r.A() * V;
  const Matrix Bc = V.transpose() * r.B();
  const Matrix Cc = r.C() * V;
  const double tol_o = rank_tol * (1.0 + std::max(norm2(Ac), norm2(Cc)));
  const Matrix U = reachable_basis(Ac.transpose(), Cc.transpose(), tol_o);
  if (U.cols() == 0) return Realization::gain(r.D());
  return Realization(U.transpose() * Ac * U, U.transpose() * Bc, Cc * U, r.D(),
                     r.domain());
}

bool pbh_test(const Realization& r, Complex z, PbhMode mode, double rank_tol) {
  const int n = r.order();
  if (n == 0) return true;
  const Matrix& other = mode == PbhMode::controllable ? r.B() : Matrix(r.C().transpose());
  const Matrix At = mode == PbhMode::controllable ? r.A() : Matrix(r.A().transpose());
  CMatrix M(n, n + other.cols());
  M.leftCols(n) = At.cast<Complex>();
  M.leftCols(n).diagonal().array() -= z;
  M.rightCols(other.cols()) = other.cast<Complex>();
  Eigen::JacobiSVD<CMatrix> svd(M);
  const Vector s = svd.singularValues();
  const double tol = rank_tol * (1.0 + s(0));
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > tol) ++rank;
  return rank == n;
}

std::vector<Complex> eigenvalues(const Matrix& A) {
  std::vector<Complex> out;
  if (A.rows() == 0) return out;
  Eigen::EigenSolver<Matrix> es(A, false);
  for (Eigen::Index k = 0; k < A.rows(); ++k) out.push_back(es.eigenvalues()(k));
  return out;
}

bool is_minimal(const Realization& r, double rank_tol) {
  for (const Complex& l : eigenvalues(r.A())) {
    if (!pbh_test(r, l, PbhMode::controllable, rank_tol)) return false;
    if (!pbh_test(r, l, PbhMode::observable, rank_tol)) return false;
  }
  return true;
}

double spectral_radius(const Matrix& A) {
  double rho = 0.0;
  for (const Complex& l : eigenvalues(A)) rho = std::max(rho, std::abs(l));
  return rho;
}

double spectral_radius(const Realization& r) {
  return spectral_radius(minimal(r).A());
}

bool is_cb_bounded(const Realization& r, StabilityDomain) {
  return spectral_radius(r) < 1.0;
}

double max_singular_value(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  if (m.rows() <= 4 && m.cols() <= 4) {
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
  }
  // The Gram matrix of the smaller side has the same largest eigenvalue.
  const CMatrix g = m.rows() <= m.cols() ? CMatrix(m * m.adjoint())
                                         : CMatrix(m.adjoint() * m);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

SupResult sup_sigma(const std::function<CMatrix(Complex)>& f, int grid_points) {
  const int G = std::max(grid_points, 3);
  std::vector<double> v(G);
  for (int k = 0; k < G; ++k)
    v[k] = max_singular_value(f(std::polar(1.0, std::numbers::pi * k / (G - 1))));
  return refine_sup(v, f);
}

SupResult refine_sup(const std::vector<double>& v,
                     const std::function<CMatrix(Complex)>& f) {
  const int G = static_cast<int>(v.size());
  SupResult best;
  if (G == 0) return best;
  auto theta = [&](int k) { return G == 1 ? 0.0 : std::numbers::pi * k / (G - 1); };
  std::vector<int> peaks;
  for (int k = 0; k < G; ++k) {
    const bool left = k == 0 || v[k] >= v[k - 1];
    const bool right = k == G - 1 || v[k] >= v[k + 1];
    if (left && right) peaks.push_back(k);
  }
  std::sort(peaks.begin(), peaks.end(), [&](int a, int b) { return v[a] > v[b]; });
  if (peaks.size() > 3) peaks.resize(3);
  for (int k = 0; k < G; ++k)
    if (v[k] > best.value) best = {v[k], theta(k)};
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto g = [&](double t) { return max_singular_value(f(std::polar(1.0, t))); };
  for (int k : peaks) {
    double a = theta(std::max(k - 1, 0)), b = theta(std::min(k + 1, G - 1));
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double gc = g(c), gd = g(d);
    for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
      if (gc >= gd) {
        b = d; d = c; gd = gc; c = b - phi * (b - a); gc = g(c);
      } else {
        a = c; c = d; gc = gd; d = a + phi * (b - a); gd = g(d);
      }
    }
    if (gc > best.value) best = {gc, c};
    if (gd > best.value) best = {gd, d};
  }
  return best;
}

double hinf_norm(const Realization& r, int grid_points) {
  const Realization m = minimal(r);
  if (m.order() == 0) {
    if (m.D().size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m.D());
    return svd.singularValues()(0);
  }
  const double rho = spectral_radius(m.A());
  if (rho >= 1.0) {
    std::ostringstream os;
    os << "hinf_norm: transfer matrix is not bounded on the unit circle exterior "
          "(spectral radius "
       << rho << ")";
    throw Error(ErrorCode::unbounded, os.str());
  }
  FrequencyEvaluator ev(m);
  return sup_sigma([&](Complex z) { return ev(z); }, grid_points).value;
}

Matrix markov(const Realization& r, int k) {
  if (k == 0) return r.D();
  Matrix X = r.B();
  for (int i = 1; i < k; ++i) X = r.A() * X;
  return r.C() * X;
}

std::vector<Matrix> markov_sequence(const Realization& r, int count) {
  std::vector<Matrix> out;
  if (count <= 0) return out;
  out.push_back(r.D());
  Matrix X = r.B();
  for (int k = 1; k < count; ++k) {
    out.push_back(r.C() * X);
    X = r.A() * X;
  }
  return out;
}

SignalTrace star(const Realization& r, const SignalTrace& u, const Vector& x0) {
  if (u.dim() != r.inputs())
    mismatch("star: signal dimension " + std::to_string(u.dim()) + " vs " +
             std::to_string(r.inputs()) + " inputs");
  Vector x = x0.size() == 0 ? Vector(Vector::Zero(r.order())) : x0;
  if (x.size() != r.order())
    mismatch("star: initial state length " + std::to_string(x.size()) +
             " vs order " + std::to_string(r.order()));
  SignalTrace y(r.outputs(), u.horizon(), u.start_index);
  for (int k = 0; k < u.horizon(); ++k) {
    const auto uk = u.data.col(k);
    y.data.col(k) = r.C() * x + r.D() * uk;
    x = r.A() * x + r.B() * uk;
  }
  return y;
}

Matrix entry_max_abs(const Realization& r, const FrequencyGrid& grid) {
  Matrix out = Matrix::Zero(r.outputs(), r.inputs());
  FrequencyEvaluator ev(r);
  for (const Complex& z : grid.points) {
    CMatrix g;
    try {
      g = ev(z);
    } catch (const SingularResolventError&) {
      g = ev(z * 1.0625);
    }
    out = out.cwiseMax(g.cwiseAbs());
  }
  return out;
}

bool is_zero_on_grid(const Realization& r, double tol) {
  if (r.outputs() == 0 || r.inputs() == 0) return true;
  return entry_max_abs(r).maxCoeff() < tol;
}

double max_deviation(const Realization& a, const Realization& b,
                     const FrequencyGrid& grid) {
  FrequencyEvaluator ea(a), eb(b);
  double worst = 0.0;
  for (const Complex& z : grid.points)
    worst = std::max(worst, max_singular_value(ea(z) - eb(z)));
  return worst;
}

}  // namespace nrf
