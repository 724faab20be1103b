#include "nrf/sparse_param.hpp"

#include <algorithm>
#include <sstream>

namespace nrf {

SparsityPattern pattern_from_neighborhoods(const AreaPartition& part,
                                           const Neighborhoods& nb) {
  validate_neighborhoods(nb, part.areas());
  const int nu = part.total(Signal::u), nx = part.total(Signal::x);
  SparsityPattern p;
  p.mask = Eigen::MatrixXi::Ones(nu, nu + nx);
  for (int r = 0; r < nu; ++r) {
    const int i = part.area_of(Signal::u, r);
    for (int j = 0; j < part.areas(); ++j) {
      if (in_neighborhood(nb, i, j)) continue;
      for (int c : part.indices(Signal::u, j)) p.mask(r, c) = 0;
      for (int c : part.indices(Signal::x, j)) p.mask(r, nu + c) = 0;
    }
    p.mask(r, r) = 0;
  }
  return p;
}

std::vector<Matrix> QParametrization::taps(const Vector& x) const {
  if (x.size() != size())
    throw Error(ErrorCode::dimension_mismatch,
                "parameter vector has length " + std::to_string(x.size()) +
                    ", basis has " + std::to_string(size()) + " elements");
  std::vector<Matrix> out = q0;
  for (int b = 0; b < size(); ++b) {
    if (x(b) == 0.0) continue;
    for (int t = 0; t < q; ++t) out[t] += x(b) * basis[b][t];
  }
  return out;
}

LeftFactorTaps left_factor_taps(const DcfBundle& d) {
  if (!d.left_fir_degree)
    throw Error(ErrorCode::non_fir,
                "A + L is not nilpotent; the sparse parametrization needs FIR "
                "left factors (deadbeat L)");
  LeftFactorTaps t;
  t.degree = *d.left_fir_degree;
  t.Yt = markov_sequence(d.Yt, t.degree + 1);
  t.Xt = markov_sequence(d.Xt, t.degree + 1);
  t.Nt = markov_sequence(d.Nt, t.degree + 1);
  t.Mt = markov_sequence(d.Mt, t.degree + 1);
  return t;
}

RowSystem assemble_row_system(const LeftFactorTaps& taps, const SparsityPattern& pat,
                              int row, int q) {
  const int nu = pat.nu(), nx = pat.nx();
  const int deg = taps.degree;
  std::vector<Vector> rows;
  std::vector<double> rhs;
  for (int c = 0; c < nu + nx; ++c) {
    if (pat.mask(row, c) != 0 || c == row) continue;
    const bool ucol = c < nu;
    const int cc = ucol ? c : c - nu;
    const auto& own = ucol ? taps.Yt : taps.Xt;
    const auto& mult = ucol ? taps.Nt : taps.Mt;
    for (int t = 0; t <= q + deg; ++t) {
      Vector e = Vector::Zero(q * nx);
      for (int k = 1; k <= q; ++k) {
        const int j = t - k;
        if (j < 0 || j > deg) continue;
        e.segment((k - 1) * nx, nx) = mult[j].col(cc);
      }
      const double f = t <= deg ? -own[t](row, cc) : 0.0;
      if (e.isZero(0.0) && f == 0.0) continue;
      rows.push_back(std::move(e));
      rhs.push_back(f);
    }
  }
  RowSystem s;
  s.E = Matrix(rows.size(), q * nx);
  s.f = Vector(rows.size());
  for (size_t k = 0; k < rows.size(); ++k) {
    s.E.row(k) = rows[k].transpose();
    s.f(k) = rhs[k];
  }
  return s;
}

namespace {

struct RowSolution {
  Vector theta;
  Matrix null;
  double residual = 0.0;
  bool consistent = true;
};

RowSolution solve_row(const RowSystem& s) {
  const Eigen::Index n = s.E.cols();
  RowSolution out;
  if (s.E.rows() == 0) {
    out.theta = Vector::Zero(n);
    out.null = Matrix::Identity(n, n);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(s.E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double tol = 1e-10 * std::max(1.0, sv(0)) *
                     static_cast<double>(std::max(s.E.rows(), s.E.cols()));
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  const Matrix& U = svd.matrixU();
  const Matrix& V = svd.matrixV();
  Vector coef = U.leftCols(rank).transpose() * s.f;
  for (Eigen::Index k = 0; k < rank; ++k) coef(k) /= sv(k);
  out.theta = V.leftCols(rank) * coef;
  out.null = V.rightCols(n - rank);
  out.residual = (s.E * out.theta - s.f).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, s.f.cwiseAbs().maxCoeff());
  out.consistent = out.residual <= kConsistencyTol * scale;
  return out;
}

std::vector<Matrix> unpack_row(const Vector& theta, int row, int q, int nu, int nx) {
  std::vector<Matrix> taps(q, Matrix::Zero(nu, nx));
  for (int k = 0; k < q; ++k) taps[k].row(row) = theta.segment(k * nx, nx).transpose();
  return taps;
}

}  // namespace

QParametrization parametrize(const DcfBundle& d, const SparsityPattern& pat, int q,
                             ParticularSolution* report) {
  if (q < 1) throw Error(ErrorCode::invalid_argument, "FIR degree q must be >= 1");
  const int nu = pat.nu(), nx = pat.nx();
  if (nu != d.plant.nu() || nx != d.plant.nx())
    throw Error(ErrorCode::dimension_mismatch, "pattern does not match plant");
  const LeftFactorTaps taps = left_factor_taps(d);
  QParametrization p;
  p.q = q;
  p.nu = nu;
  p.nx = nx;
  p.q0.assign(q, Matrix::Zero(nu, nx));
  ParticularSolution sol;
  sol.feasible = true;
  for (int r = 0; r < nu; ++r) {
    const RowSolution rs = solve_row(assemble_row_system(taps, pat, r, q));
    sol.residual = std::max(sol.residual, rs.residual);
    if (!rs.consistent) {
      sol.feasible = false;
      sol.infeasible_rows.push_back(r);
    }
    const auto t0 = unpack_row(rs.theta, r, q, nu, nx);
    for (int k = 0; k < q; ++k) p.q0[k] += t0[k];
    for (Eigen::Index b = 0; b < rs.null.cols(); ++b) {
      p.basis.push_back(unpack_row(rs.null.col(b), r, q, nu, nx));
      p.basis_row.push_back(r);
    }
  }
  p.residual = sol.residual;
  sol.q0 = p.q0;
  if (!sol.feasible) {
    std::ostringstream os;
    os << "sparsity pattern infeasible at FIR degree " << q << ": minimal residual "
       << sol.residual << " in rows";
    for (int r : sol.infeasible_rows) os << " " << r + 1;
    sol.message = os.str();
    p.basis.clear();
    p.basis_row.clear();
  }
  if (report) *report = sol;
  return p;
}

ParticularSolution solve_particular(const DcfBundle& d, const SparsityPattern& pat,
                                    int q) {
  ParticularSolution sol;
  parametrize(d, pat, q, &sol);
  return sol;
}

std::vector<std::vector<Matrix>> nullspace_basis(const DcfBundle& d,
                                                 const SparsityPattern& pat, int q,
                                                 std::vector<int>* rows) {
  const int nu = pat.nu(), nx = pat.nx();
  const LeftFactorTaps taps = left_factor_taps(d);
  std::vector<std::vector<Matrix>> out;
  if (rows) rows->clear();
  for (int r = 0; r < nu; ++r) {
    const RowSolution rs = solve_row(assemble_row_system(taps, pat, r, q));
    for (Eigen::Index b = 0; b < rs.null.cols(); ++b) {
      out.push_back(unpack_row(rs.null.col(b), r, q, nu, nx));
      if (rows) rows->push_back(r);
    }
  }
  return out;
}

Realization fir_realization(const std::vector<Matrix>& taps) {
  if (taps.empty())
    throw Error(ErrorCode::invalid_argument, "FIR realization needs at least one tap");
  const int q = static_cast<int>(taps.size());
  const int p = static_cast<int>(taps[0].rows()), m = static_cast<int>(taps[0].cols());
  if (p <= m) {
    const int n = q * p;
    Matrix A = Matrix::Zero(n, n), B(n, m), C = Matrix::Zero(p, n);
    for (int k = 0; k < q; ++k) {
      B.middleRows(k * p, p) = taps[k];
      if (k + 1 < q) A.block(k * p, (k + 1) * p, p, p).setIdentity();
    }
    C.leftCols(p).setIdentity();
    return Realization(std::move(A), std::move(B), std::move(C), Matrix::Zero(p, m));
  }
  const int n = q * m;
  Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, m), C(p, n);
  B.topRows(m).setIdentity();
  for (int k = 0; k < q; ++k) {
    C.middleCols(k * m, m) = taps[k];
    if (k + 1 < q) A.block((k + 1) * m, k * m, m, m).setIdentity();
  }
  return Realization(std::move(A), std::move(B), std::move(C), Matrix::Zero(p, m));
}

Realization q_from_x(const QParametrization& p, const Vector& x) {
  return fir_realization(p.taps(x));
}

double pattern_violation(const DcfBundle& d, const SparsityPattern& pat,
                         const Realization& Q) {
  const Realization K = stack_cols({d.Yt + Q * d.Nt, d.Xt + Q * d.Mt});
  const Matrix em = entry_max_abs(minimal(K));
  double worst = 0.0;
  for (int r = 0; r < pat.nu(); ++r)
    for (int c = 0; c < pat.mask.cols(); ++c)
      if (pat.mask(r, c) == 0 && c != r) worst = std::max(worst, em(r, c));
  return worst;
}

}  // namespace nrf
