#include "nrf/controller.hpp"

#include <sstream>

namespace nrf {

namespace {

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Realization entry(const Realization& r, int i, int j) {
  return select_cols(select_rows(r, {i}), {j});
}

}  // namespace

NrfPair form_nrf_pair(const DcfBundle& d, const Realization& Q) {
  const int nu = d.plant.nu(), nx = d.plant.nx();
  if (Q.outputs() != nu || Q.inputs() != nx)
    throw Error(ErrorCode::dimension_mismatch,
                "Q must be " + std::to_string(nu) + "x" + std::to_string(nx));
  if (Q.D().size() > 0 && Q.D().cwiseAbs().maxCoeff() > 1e-14)
    throw Error(ErrorCode::not_strictly_proper,
                "Q must be strictly proper (zero feedthrough)");
  if (Q.order() > 0 && spectral_radius(Q) >= 1.0)
    throw Error(ErrorCode::unbounded, "Q must be stable");
  NrfPair p;
  p.Q = Realization(Q.A(), Q.B(), Q.C(), Matrix::Zero(nu, nx));
  p.Yq = minimal(d.Yt + p.Q * d.Nt);
  p.Xq = minimal(d.Xt + p.Q * d.Mt);

  std::vector<Realization> diag, diag_inv;
  for (int l = 0; l < nu; ++l) {
    Realization e = minimal(entry(p.Yq, l, l));
    if (std::abs(e.D()(0, 0)) < 1e-12)
      throw Error(ErrorCode::singular_diagonal,
                  "diagonal entry " + std::to_string(l + 1) +
                      " of Yt + Q Nt vanishes at infinity");
    diag_inv.push_back(inverse(e));
    diag.push_back(std::move(e));
  }
  p.Ydiag = block_diag(diag);
  const Realization yd_inv = block_diag(diag_inv);
  const Realization off = p.Ydiag - p.Yq;
  p.Phi = minimal(yd_inv * off);
  p.Gamma = minimal(yd_inv * p.Xq);
  p.KD = minimal(yd_inv * stack_cols({off, p.Xq}));
  return p;
}

ControllerRow extract_row(const Realization& KD, int row, double rank_tol) {
  if (row < 0 || row >= KD.outputs())
    throw Error(ErrorCode::invalid_argument,
                "row " + std::to_string(row + 1) + " out of range");
  ControllerRow out;
  out.index = row;
  const Realization r = minimal(select_rows(KD, {row}), rank_tol);
  const Matrix em = entry_max_abs(r);
  for (int j = 0; j < r.inputs(); ++j)
    if (em(0, j) < kGridZeroTol) out.zero_cols.push_back(j);

  Matrix Dr = r.D();
  for (int j : out.zero_cols) Dr(0, j) = 0.0;
  const int n = r.order();
  if (n == 0) {
    out.minimal_row = r;
    out.K = Matrix(0, r.inputs());
    out.canonical = Realization::gain(Dr);
    return out;
  }

  Eigen::RealSchur<Matrix> schur(r.A());
  const Matrix T = schur.matrixT();
  const Matrix U = schur.matrixU();
  const Matrix Bh = U.transpose() * r.B();
  const Matrix Ch = r.C() * U;
  out.minimal_row = Realization(T, Bh, Ch, r.D());

  std::vector<double> poly{1.0};
  for (int k = 0; k < n;) {
    if (k + 1 < n && T(k + 1, k) != 0.0) {
      const double tr = T(k, k) + T(k + 1, k + 1);
      const double det = T(k, k) * T(k + 1, k + 1) - T(k, k + 1) * T(k + 1, k);
      poly = poly_mul(poly, {1.0, -tr, det});
      k += 2;
    } else {
      poly = poly_mul(poly, {1.0, -T(k, k)});
      k += 1;
    }
  }
  out.chi.assign(poly.begin() + 1, poly.end());

  std::vector<Matrix> h(n + 1);
  Matrix X = Bh;
  for (int k = 1; k <= n; ++k) {
    h[k] = Ch * X;
    X = T * X;
  }
  out.K = Matrix::Zero(n, r.inputs());
  for (int j = 1; j <= n; ++j) {
    Matrix kj = h[j];
    for (int i = 1; i < j; ++i) kj += out.chi[i - 1] * h[j - i];
    out.K.row(j - 1) = kj;
  }
  for (int j : out.zero_cols) out.K.col(j).setZero();

  Matrix Ar = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    Ar(i, 0) = -out.chi[i];
    if (i + 1 < n) Ar(i, i + 1) = 1.0;
  }
  Matrix Cr = Matrix::Zero(1, n);
  Cr(0, 0) = 1.0;
  out.canonical = Realization(Ar, out.K, Cr, Dr);
  return out;
}

void verify_sparsity_inheritance(const ControllerRow& row, const Realization& KD) {
  const Matrix em = entry_max_abs(select_rows(KD, {row.index}));
  std::vector<std::pair<int, int>> bad;
  for (int j = 0; j < em.cols(); ++j) {
    if (em(0, j) >= kGridZeroTol) continue;
    const bool b_zero = row.canonical.B().col(j).isZero(0.0);
    const bool d_zero = row.canonical.D()(0, j) == 0.0;
    if (!b_zero || !d_zero) bad.emplace_back(row.index + 1, j + 1);
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << "sparsity inheritance violated at " << bad.size() << " entries, first ("
       << bad.front().first << ", " << bad.front().second << ")";
    throw ViolationError(ErrorCode::inheritance_violation, bad, os.str());
  }
}

AreaController stack_area(const std::vector<ControllerRow>& rows,
                          const AreaPartition& part, int i) {
  const int off = part.offset(Signal::u, i), cnt = part.size(Signal::u, i);
  if (static_cast<int>(rows.size()) != cnt)
    throw Error(ErrorCode::invalid_argument,
                "area " + std::to_string(i + 1) + " expects " +
                    std::to_string(cnt) + " rows");
  AreaController a;
  a.area = i;
  std::vector<Realization> parts;
  for (int k = 0; k < cnt; ++k) {
    if (rows[k].index != off + k)
      throw Error(ErrorCode::invalid_argument,
                  "area " + std::to_string(i + 1) + " received row " +
                      std::to_string(rows[k].index + 1) + ", expected " +
                      std::to_string(off + k + 1));
    parts.push_back(rows[k].canonical);
    a.row_orders.push_back(rows[k].order());
  }
  a.r = stack_rows(parts);
  a.wc = Vector::Zero(a.r.order());
  return a;
}

std::vector<AreaController> build_bank(const Realization& KD,
                                       const AreaPartition& part,
                                       std::vector<ControllerRow>* rows_out) {
  std::vector<ControllerRow> rows;
  for (int l = 0; l < KD.outputs(); ++l) rows.push_back(extract_row(KD, l));
  std::vector<AreaController> bank;
  for (int i = 0; i < part.areas(); ++i) {
    const int off = part.offset(Signal::u, i), cnt = part.size(Signal::u, i);
    std::vector<ControllerRow> mine(rows.begin() + off, rows.begin() + off + cnt);
    bank.push_back(stack_area(mine, part, i));
  }
  if (rows_out) *rows_out = std::move(rows);
  return bank;
}

Realization bank_realization(const std::vector<AreaController>& bank) {
  std::vector<Realization> parts;
  for (const auto& a : bank) parts.push_back(a.r);
  return stack_rows(parts);
}

AreaPartition partition_with_bank(const AreaPartition& part,
                                  const std::vector<AreaController>& bank) {
  std::vector<int> nw;
  for (const auto& a : bank) nw.push_back(a.order());
  return part.with_controller_sizes(nw);
}

std::vector<int> kd_columns_of_area(const AreaPartition& part, int j) {
  std::vector<int> cols = part.indices(Signal::u, j);
  const int nu = part.total(Signal::u);
  for (int k : part.indices(Signal::x, j)) cols.push_back(nu + k);
  return cols;
}

void check_comm_constraints(const std::vector<AreaController>& bank,
                            const AreaPartition& part, const Neighborhoods& nb) {
  validate_neighborhoods(nb, part.areas());
  std::vector<std::pair<int, int>> bad;
  for (const auto& a : bank) {
    const int i = a.area;
    for (int j = 0; j < part.areas(); ++j) {
      if (in_neighborhood(nb, i, j)) continue;
      const std::vector<int> cols = kd_columns_of_area(part, j);
      bool ok = true;
      for (int c : cols)
        ok = ok && a.r.B().col(c).isZero(0.0) && a.r.D().col(c).isZero(0.0);
      if (ok) ok = is_zero_on_grid(select_cols(a.r, cols));
      if (!ok) bad.emplace_back(i + 1, j + 1);
    }
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << "communication constraints violated for " << bad.size()
       << " area pairs:";
    for (auto [i, j] : bad) os << " (" << i << "," << j << ")";
    throw ViolationError(ErrorCode::comm_violation, bad, os.str());
  }
}

}  // namespace nrf
