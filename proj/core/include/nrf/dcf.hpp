#pragma once

#include <optional>

#include "nrf/lti.hpp"
#include "nrf/partition.hpp"

namespace nrf {

/// Networked plant x+ = A x + B_u u + B_d d with full state output.
struct Plant {
  Matrix A;
  Matrix Bu;
  Matrix Bd;

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(Bu.cols()); }
  int nd() const { return static_cast<int>(Bd.cols()); }

  /// Checks dimensions; throws on mismatch.
  void validate() const;
  Realization gu() const;
  Realization gd() const;
};

enum class GainStrategy {
  block_diagonalizing_F_deadbeat_L,
  lqr_F_deadbeat_L,
  user_supplied,
};

GainStrategy parse_gain_strategy(const std::string& name);
std::string to_string(GainStrategy s);

struct Gains {
  Matrix F;  // n_u x n_x, A + B_u F stable
  Matrix L;  // n_x x n_x, A + L stable
};

/// Per-area deadbeat observer gain: L = diag(D_1, ..., D_N) - A where each
/// D_i is a nilpotent block sharing the first rows of A_ii when possible.
Matrix deadbeat_observer_gain(const Plant& plant, const AreaPartition& part);

/// Chooses (F, L). `user` is only read for GainStrategy::user_supplied.
Gains design_gains(const Plant& plant, const AreaPartition& part,
                   GainStrategy strategy, const Gains* user = nullptr);

/// Throws uncontrollable_mode if some eigenvalue with |z| >= 1 fails PBH.
void check_cb_controllable(const Plant& plant);

/// Doubly coprime factorization of G_u = (zI - A)^{-1} B_u, with the
/// feedback convention u = K x and K = Yt^{-1} Xt.
struct DcfBundle {
  Realization N, M, X, Y;
  Realization Nt, Mt, Xt, Yt;
  Matrix F, L;
  double bezout_residual = 0.0;
  int grid_size = 0;
  /// Nilpotency index of A + L (left factors are FIR of this degree).
  std::optional<int> left_fir_degree;
  /// Nilpotency index of A + B_u F (right factors FIR).
  std::optional<int> right_fir_degree;
  Plant plant;

  /// Mt (zI - A)^{-1} B_d, realized on the stable pencil of A + L.
  Realization gd_tilde() const;
  /// Mt (zI - A)^{-1} z.
  Realization j1() const;
  /// [N; M] sharing one state vector.
  Realization nm() const;
  /// [Y; X] sharing one state vector.
  Realization yx() const;
};

inline constexpr double kBezoutTol = 1e-8;

/// Builds and certifies the factorization. Throws bezout_residual or
/// normalization errors if the post-checks fail.
DcfBundle build_dcf(const Plant& plant, const Matrix& F, const Matrix& L,
                    int grid_points = 512);

/// Max over the grid of sigma_max(left * right - I).
double verify_bezout(const DcfBundle& d, const FrequencyGrid& grid);

/// Smallest k with ||A^k|| negligible, if A is nilpotent.
std::optional<int> nilpotency_index(const Matrix& A, double tol = 1e-10);

}  // namespace nrf
