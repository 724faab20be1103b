#include "nrf/closed_loop.hpp"

namespace nrf {

namespace {

void require_bounded(const Realization& r, const char* what) {
  if (r.order() > 0 && spectral_radius(r.A()) >= 1.0)
    throw Error(ErrorCode::unbounded,
                std::string(what) + " is not C_b-bounded (spectral radius " +
                    std::to_string(spectral_radius(r.A())) + ")");
}

std::vector<int> range(int start, int count) {
  std::vector<int> out(count);
  for (int k = 0; k < count; ++k) out[k] = start + k;
  return out;
}

Vector gather(const Vector& v, const std::vector<int>& idx) {
  Vector out(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) out(k) = v(idx[k]);
  return out;
}

SignalTrace gather_rows(const SignalTrace& t, const std::vector<int>& idx) {
  SignalTrace out(static_cast<int>(idx.size()), t.horizon(), t.start_index);
  for (size_t k = 0; k < idx.size(); ++k) out.data.row(k) = t.data.row(idx[k]);
  return out;
}

}  // namespace

Realization build_fq(const DcfBundle& d, const NrfPair& pair) {
  const int nx = d.plant.nx(), nu = d.plant.nu();
  const Realization P = d.nm();
  Matrix sel = Matrix::Zero(nx + nu, nu);
  sel.bottomRows(nu).setIdentity();
  const Realization yxq = d.yx() + P * pair.Q;
  const Realization fq = minimal(stack_cols({
      P * pair.Xq,
      P * pair.Yq - Realization::gain(sel),
      P * (pair.Ydiag - pair.Yq),
      yxq * d.gd_tilde(),
  }));
  require_bounded(fq, "F_Q");
  return fq;
}

Realization build_fq(const DcfBundle& d, const Realization& Q) {
  return build_fq(d, form_nrf_pair(d, Q));
}

Realization build_j2(const NrfPair& pair, const std::vector<AreaController>& bank) {
  const Realization w = bank_realization(bank);
  const Realization shift(w.A(), w.A(), w.C(), w.C());
  return minimal(pair.Ydiag * shift);
}

Realization build_iq(const DcfBundle& d, const NrfPair& pair,
                     const std::vector<AreaController>& bank) {
  const Realization P = d.nm();
  const Realization yxq = d.yx() + P * pair.Q;
  const Realization iq = minimal(stack_cols({yxq * d.j1(), P * build_j2(pair, bank)}));
  require_bounded(iq, "I_Q");
  return iq;
}

ClosedLoopMaps build_maps(const DcfBundle& d, const NrfPair& pair,
                          const std::vector<AreaController>& bank) {
  ClosedLoopMaps m;
  m.nx = d.plant.nx();
  m.nu = d.plant.nu();
  m.nd = d.plant.nd();
  m.Q = pair.Q;
  m.FQ = build_fq(d, pair);
  m.J1 = d.j1();
  m.J2 = build_j2(pair, bank);
  m.Gd = d.plant.gd();
  const Realization P = d.nm();
  const Realization yxq = d.yx() + P * pair.Q;
  m.IQ = minimal(stack_cols({yxq * m.J1, P * m.J2}));
  require_bounded(m.IQ, "I_Q");
  m.nw = m.IQ.inputs() - m.nx;
  return m;
}

Matrix iq_at(const Realization& IQ, int k) { return markov(IQ, k); }

SignalTrace impulse_path(const Realization& r, const Vector& v, int horizon) {
  if (v.size() != r.inputs())
    throw Error(ErrorCode::dimension_mismatch, "impulse_path: vector length mismatch");
  SignalTrace out(r.outputs(), horizon);
  if (horizon == 0) return out;
  out.data.col(0) = r.D() * v;
  Vector s = r.B() * v;
  for (int t = 1; t < horizon; ++t) {
    out.data.col(t) = r.C() * s;
    s = r.A() * s;
  }
  return out;
}

std::vector<int> area_rows(const ClosedLoopMaps& maps, const AreaPartition& part,
                           int i) {
  std::vector<int> rows = part.indices(Signal::x, i);
  for (int k : part.indices(Signal::u, i)) rows.push_back(maps.nx + k);
  return rows;
}

std::vector<int> fq_coupling_cols(const ClosedLoopMaps& maps, const AreaPartition& part,
                                  int j) {
  std::vector<int> cols = part.indices(Signal::x, j);
  for (int k : part.indices(Signal::u, j)) cols.push_back(maps.fq_col_beta_u() + k);
  return cols;
}

std::vector<int> fq_disturbance_cols(const ClosedLoopMaps& maps) {
  return range(maps.fq_col_beta_f(), maps.nu + maps.nd);
}

std::vector<int> iq_area_cols(const ClosedLoopMaps& maps, const AreaPartition& part,
                              int j) {
  if (!part.has_controller_sizes())
    throw Error(ErrorCode::invalid_argument,
                "partition carries no controller-state sizes");
  if (part.total(Signal::w) != maps.nw)
    throw Error(ErrorCode::dimension_mismatch,
                "controller-state sizes do not match I_Q");
  std::vector<int> cols = part.indices(Signal::x, j);
  for (int k : part.indices(Signal::w, j)) cols.push_back(maps.nx + k);
  return cols;
}

Realization area_block(const ClosedLoopMaps& maps, const AreaPartition& part,
                       BlockKind kind, int i, int j) {
  if (i < 0 || i >= part.areas() || j < 0 || j >= part.areas())
    throw Error(ErrorCode::invalid_argument, "area index out of range");
  const std::vector<int> rows = area_rows(maps, part, i);
  switch (kind) {
    case BlockKind::disturbance:
      return minimal(select_cols(select_rows(maps.FQ, rows), fq_disturbance_cols(maps)));
    case BlockKind::coupling:
      return minimal(select_cols(select_rows(maps.FQ, rows),
                                 fq_coupling_cols(maps, part, j)));
    case BlockKind::init:
      return minimal(
          select_cols(select_rows(maps.IQ, rows), iq_area_cols(maps, part, j)));
  }
  return Realization();
}

Realization PredictionModel::realization() const {
  Matrix B(A.rows(), B1.cols() + B2.cols()), C(Cx.rows() + Cu.rows(), A.rows());
  B << B1, B2;
  C << Cx, Cu;
  return Realization(A, B, C, Matrix::Zero(C.rows(), B.cols()));
}

PredictionModel prediction_model(const ClosedLoopMaps& maps, const AreaPartition& part,
                                 int i) {
  const Realization r = area_block(maps, part, BlockKind::coupling, i, i);
  const double dmax = r.D().size() ? r.D().cwiseAbs().maxCoeff() : 0.0;
  if (dmax > 1e-10)
    throw Error(ErrorCode::nonzero_feedthrough,
                "prediction model of area " + std::to_string(i + 1) +
                    " has feedthrough " + std::to_string(dmax));
  const int nxi = part.size(Signal::x, i);
  PredictionModel pm;
  pm.area = i;
  pm.A = r.A();
  pm.B1 = r.B().leftCols(nxi);
  pm.B2 = r.B().rightCols(r.inputs() - nxi);
  pm.Cx = r.C().topRows(nxi);
  pm.Cu = r.C().bottomRows(r.outputs() - nxi);
  return pm;
}

ResponseDecomposition decompose_response(const ClosedLoopMaps& maps,
                                         const AreaPartition& part,
                                         const Neighborhoods& nb, int i,
                                         const SignalTrace& exo, const Vector& xc,
                                         const Vector& wc, const SignalTrace& us) {
  validate_neighborhoods(nb, part.areas());
  if (exo.dim() != maps.FQ.inputs())
    throw Error(ErrorCode::dimension_mismatch, "exogenous trace has wrong dimension");
  if (us.dim() != maps.nx + maps.nu || us.horizon() != exo.horizon())
    throw Error(ErrorCode::dimension_mismatch, "shaping-input trace has wrong shape");
  if (xc.size() != maps.nx || wc.size() != maps.nw)
    throw Error(ErrorCode::dimension_mismatch, "initial condition has wrong size");
  const int H = exo.horizon();
  const std::vector<int> rows = area_rows(maps, part, i);
  Vector ic(maps.nx + maps.nw);
  ic << xc, wc;

  auto shaping = [&](int j) {
    std::vector<int> idx = part.indices(Signal::x, j);
    for (int k : part.indices(Signal::u, j)) idx.push_back(maps.nx + k);
    return gather_rows(us, idx);
  };

  ResponseDecomposition out;
  out.psi = star(select_rows(maps.FQ, rows), exo);
  out.xi_out = star(prediction_model(maps, part, i).realization(), shaping(i));
  out.theta = SignalTrace(static_cast<int>(rows.size()), H);
  out.delta = SignalTrace(static_cast<int>(rows.size()), H);
  for (int j = 0; j < part.areas(); ++j) {
    const Realization init = area_block(maps, part, BlockKind::init, i, j);
    const SignalTrace path = impulse_path(init, gather(ic, iq_area_cols(maps, part, j)), H);
    if (in_neighborhood(nb, i, j))
      out.theta.data += path.data;
    else
      out.delta.data += path.data;
    if (j != i)
      out.delta.data +=
          star(area_block(maps, part, BlockKind::coupling, i, j), shaping(j)).data;
  }
  return out;
}

}  // namespace nrf
