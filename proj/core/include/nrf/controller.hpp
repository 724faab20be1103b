#pragma once

#include <vector>

#include "nrf/dcf.hpp"
#include "nrf/partition.hpp"

namespace nrf {

/// NRF pair (Phi, Gamma) generated by a DCF and a strictly proper Q.
struct NrfPair {
  Realization Q;
  Realization Yq;     // Yt + Q Nt
  Realization Xq;     // Xt + Q Mt
  Realization Ydiag;  // diagonal part of Yq
  Realization Phi;    // I - Ydiag^{-1} Yq
  Realization Gamma;  // Ydiag^{-1} Xq
  Realization KD;     // [Phi Gamma]
};

NrfPair form_nrf_pair(const DcfBundle& d, const Realization& Q);

/// One row of K_D in observable canonical form.
struct ControllerRow {
  int index = 0;               // 0-based input index
  Realization minimal_row;     // Schur-coordinate minimal realization
  std::vector<double> chi;     // a_1 .. a_n of det(zI - A_hat)
  Matrix K;                    // n x cols numerator coefficient rows
  Realization canonical;       // (A_r, B_r, e_1^T, D_r)
  std::vector<int> zero_cols;  // entries classified identically zero

  int order() const { return canonical.order(); }
};

ControllerRow extract_row(const Realization& KD, int row,
                          double rank_tol = kDefaultRankTol);

/// Throws ViolationError(inheritance_violation) listing 1-based (row, col).
void verify_sparsity_inheritance(const ControllerRow& row, const Realization& KD);

/// Stacked realization of the rows belonging to one area.
struct AreaController {
  int area = 0;
  Realization r;  // (A_wi, B_wi, C_wi, D_wi)
  Vector wc;      // initial state
  std::vector<int> row_orders;

  int order() const { return r.order(); }
};

AreaController stack_area(const std::vector<ControllerRow>& rows,
                          const AreaPartition& part, int i);

/// Builds every row and every area controller.
std::vector<AreaController> build_bank(const Realization& KD,
                                       const AreaPartition& part,
                                       std::vector<ControllerRow>* rows_out = nullptr);

/// Global controller (A_w, B_w, C_w, D_w) stacking all areas.
Realization bank_realization(const std::vector<AreaController>& bank);

/// Attaches n_wi to the partition.
AreaPartition partition_with_bank(const AreaPartition& part,
                                  const std::vector<AreaController>& bank);

/// Columns of the K_D input vector [u_f + beta_f; x + beta_x] owned by area j.
std::vector<int> kd_columns_of_area(const AreaPartition& part, int j);

/// Throws ViolationError(comm_violation) listing 1-based (i, j) pairs.
void check_comm_constraints(const std::vector<AreaController>& bank,
                            const AreaPartition& part, const Neighborhoods& nb);

}  // namespace nrf
