#pragma once

#include <vector>

#include "nrf/controller.hpp"
#include "nrf/dcf.hpp"
#include "nrf/partition.hpp"

namespace nrf {

/// Closed-loop maps of the NRF-controlled network.
///
/// F_Q maps d_s = [beta_x; beta_u; beta_f; d] to [x; u_f].
/// I_Q maps the initial conditions through its impulse response:
/// [x; u_f][k] includes iq_at(I_Q, k) [x_c; w_c].
struct ClosedLoopMaps {
  Realization FQ;
  Realization IQ;
  Realization J1;
  Realization J2;
  Realization Gd;
  Realization Q;
  int nx = 0, nu = 0, nd = 0, nw = 0;

  int fq_col_beta_x() const { return 0; }
  int fq_col_beta_u() const { return nx; }
  int fq_col_beta_f() const { return nx + nu; }
  int fq_col_d() const { return nx + 2 * nu; }
};

Realization build_fq(const DcfBundle& d, const NrfPair& pair);
Realization build_fq(const DcfBundle& d, const Realization& Q);

/// Ydiag C_w (zI - A_w)^{-1} z for the stacked bank.
Realization build_j2(const NrfPair& pair, const std::vector<AreaController>& bank);
Realization build_iq(const DcfBundle& d, const NrfPair& pair,
                     const std::vector<AreaController>& bank);

ClosedLoopMaps build_maps(const DcfBundle& d, const NrfPair& pair,
                          const std::vector<AreaController>& bank);

Matrix iq_at(const Realization& IQ, int k);

/// Output sequence sum_k markov(r, k) v delta[k - t], i.e. the path of the
/// impulse response applied to a fixed vector, for t = 0..horizon-1.
SignalTrace impulse_path(const Realization& r, const Vector& v, int horizon);

enum class BlockKind { disturbance, coupling, init };

/// disturbance: rows of area i, columns (beta_f, d).
/// coupling: rows of area i, columns (beta_x, beta_u) of area j.
/// init: rows of area i, columns (x_c, w_c) of area j.
Realization area_block(const ClosedLoopMaps& maps, const AreaPartition& part,
                       BlockKind kind, int i, int j);

/// Column indices of F_Q for the (beta_x, beta_u) inputs of area j.
std::vector<int> fq_coupling_cols(const ClosedLoopMaps& maps,
                                  const AreaPartition& part, int j);
std::vector<int> fq_disturbance_cols(const ClosedLoopMaps& maps);
/// Row indices of F_Q and I_Q for (x_i, u_fi).
std::vector<int> area_rows(const ClosedLoopMaps& maps, const AreaPartition& part,
                           int i);
/// Column indices of I_Q for (x_cj, w_cj). Requires controller sizes.
std::vector<int> iq_area_cols(const ClosedLoopMaps& maps, const AreaPartition& part,
                              int j);

/// Zero-initial-state model of area i driven by its own shaping inputs.
struct PredictionModel {
  int area = 0;
  Matrix A;   // A_si
  Matrix B1;  // B_s1i, driven by u_s1i
  Matrix B2;  // B_s2i, driven by u_s2i
  Matrix Cx;  // C_xi
  Matrix Cu;  // C_ui

  int order() const { return static_cast<int>(A.rows()); }
  Realization realization() const;
};

PredictionModel prediction_model(const ClosedLoopMaps& maps, const AreaPartition& part,
                                 int i);

/// Per-area split of the closed-loop response.
///
/// `exo` is d_s built from exogenous channels only (zeta + beta_s1, beta_s2,
/// beta_f, d). `us` stacks the shaping inputs [u_s1; u_s2] of every area.
/// xi_out = C xi, driven by area i's own shaping inputs from a zero state.
struct ResponseDecomposition {
  SignalTrace xi_out;
  SignalTrace psi;
  SignalTrace theta;
  SignalTrace delta;
};

ResponseDecomposition decompose_response(const ClosedLoopMaps& maps,
                                         const AreaPartition& part,
                                         const Neighborhoods& nb, int i,
                                         const SignalTrace& exo, const Vector& xc,
                                         const Vector& wc, const SignalTrace& us);

}  // namespace nrf
