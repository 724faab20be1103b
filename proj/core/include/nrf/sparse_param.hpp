#pragma once

#include <string>
#include <vector>

#include "nrf/dcf.hpp"
#include "nrf/partition.hpp"

namespace nrf {

/// Binary n_u x (n_u + n_x) mask over the columns of K_D = [Phi Gamma].
/// A zero marks an entry that must vanish identically. Diagonal entries of
/// the Phi block are zero by construction of every NRF pair.
struct SparsityPattern {
  Eigen::MatrixXi mask;

  int nu() const { return static_cast<int>(mask.rows()); }
  int nx() const { return static_cast<int>(mask.cols()) - nu(); }
};

SparsityPattern pattern_from_neighborhoods(const AreaPartition& part,
                                           const Neighborhoods& nb);

/// FIR parametrization Q(x) = Q0 + sum_k x_k basis_k, with
/// Q(z) = sum_{t=1..q} Q_t z^{-t}. taps[t-1] holds Q_t.
struct QParametrization {
  int q = 0;
  int nu = 0;
  int nx = 0;
  std::vector<Matrix> q0;
  std::vector<std::vector<Matrix>> basis;
  std::vector<int> basis_row;  // row of Q each basis element lives in
  double residual = 0.0;

  int size() const { return static_cast<int>(basis.size()); }
  std::vector<Matrix> taps(const Vector& x) const;
};

struct ParticularSolution {
  bool feasible = false;
  double residual = 0.0;  // max-abs residual of the stacked system
  std::vector<Matrix> q0;
  std::vector<int> infeasible_rows;  // rows of Q whose system is inconsistent
  std::string message;
};

inline constexpr double kConsistencyTol = 1e-9;

/// Impulse-response taps of the left factors, up to their FIR degree.
struct LeftFactorTaps {
  int degree = 0;
  std::vector<Matrix> Yt, Xt, Nt, Mt;
};

/// Throws ErrorCode::non_fir if A + L is not nilpotent.
LeftFactorTaps left_factor_taps(const DcfBundle& d);

/// Coefficient-matching system of one row of Q. Unknowns are
/// [Q_1(r,:), ..., Q_q(r,:)]; equations E theta = f.
struct RowSystem {
  Matrix E;
  Vector f;
};
RowSystem assemble_row_system(const LeftFactorTaps& taps, const SparsityPattern& pat,
                              int row, int q);

ParticularSolution solve_particular(const DcfBundle& d, const SparsityPattern& pat,
                                    int q);
std::vector<std::vector<Matrix>> nullspace_basis(const DcfBundle& d,
                                                 const SparsityPattern& pat, int q,
                                                 std::vector<int>* rows = nullptr);

/// Both pieces at once; `feasible` false leaves basis empty.
QParametrization parametrize(const DcfBundle& d, const SparsityPattern& pat, int q,
                             ParticularSolution* report = nullptr);

/// Strictly proper FIR realization of the given taps (Q_1..Q_q).
Realization fir_realization(const std::vector<Matrix>& taps);
Realization q_from_x(const QParametrization& p, const Vector& x);

/// max over pattern zeros of the entries of (Yt + Q Nt, Xt + Q Mt) on the
/// zero-test grid.
double pattern_violation(const DcfBundle& d, const SparsityPattern& pat,
                         const Realization& Q);

}  // namespace nrf
