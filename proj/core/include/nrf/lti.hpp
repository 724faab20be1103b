#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "nrf/errors.hpp"

namespace nrf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

enum class StabilityDomain { unit_disc };

inline constexpr double kDefaultRankTol = 1e-9;
inline constexpr double kGridZeroTol = 1e-8;

/// Discrete-time state-space quadruple (A, B, C, D).
class Realization {
 public:
  Realization() = default;
  Realization(Matrix A, Matrix B, Matrix C, Matrix D,
              StabilityDomain domain = StabilityDomain::unit_disc);

  static Realization gain(const Matrix& D);
  static Realization zero(int outputs, int inputs);
  static Realization identity(int n);
  /// z^{-1} I_n.
  static Realization delay(int n);

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& C() const { return C_; }
  const Matrix& D() const { return D_; }
  int order() const { return static_cast<int>(A_.rows()); }
  int inputs() const { return static_cast<int>(D_.cols()); }
  int outputs() const { return static_cast<int>(D_.rows()); }
  StabilityDomain domain() const { return domain_; }

  /// C (zI - A)^{-1} B + D. Throws SingularResolventError at poles.
  CMatrix eval(Complex z) const;

 private:
  Matrix A_{0, 0}, B_{0, 0}, C_{0, 0}, D_{0, 0};
  StabilityDomain domain_ = StabilityDomain::unit_disc;
};

Realization make_realization(Matrix A, Matrix B, Matrix C, Matrix D);

/// Evaluates one realization at many points; the Hessenberg reduction of A
/// is computed once so each point costs O(n^2 m).
class FrequencyEvaluator {
 public:
  explicit FrequencyEvaluator(const Realization& r);
  CMatrix operator()(Complex z) const;
  int outputs() const { return static_cast<int>(D_.rows()); }
  int inputs() const { return static_cast<int>(D_.cols()); }

 private:
  Matrix H_;
  Matrix Bt_;
  Matrix Ct_;
  Matrix D_;
  Matrix A_;
  double scale_ = 0.0;
};

struct FrequencyGrid {
  std::vector<Complex> points;
  int count() const { return static_cast<int>(points.size()); }

  /// `count` points e^{i theta}, theta uniformly spaced over [0, 2 pi).
  static FrequencyGrid unit_circle(int count);
  /// `count` points covering the closed upper half circle, theta in [0, pi].
  static FrequencyGrid half_circle(int count);
  /// Chebyshev-spaced points on the open upper half circle, used for
  /// identically-zero classification.
  static FrequencyGrid chebyshev(int count = 64);
};

/// Time-indexed samples stored column-wise: data.col(k - start_index).
struct SignalTrace {
  long start_index = 0;
  Matrix data;

  SignalTrace() = default;
  SignalTrace(int dim, int horizon, long start = 0)
      : start_index(start), data(Matrix::Zero(dim, horizon)) {}

  int dim() const { return static_cast<int>(data.rows()); }
  int horizon() const { return static_cast<int>(data.cols()); }
};

// Composition. Every result realizes the pointwise operation on evals.
Realization operator*(const Realization& left, const Realization& right);
Realization operator*(const Matrix& left, const Realization& right);
Realization operator*(const Realization& left, const Matrix& right);
Realization operator+(const Realization& a, const Realization& b);
Realization operator-(const Realization& a, const Realization& b);
Realization operator-(const Realization& a);
Realization operator*(double s, const Realization& r);

/// Signal first passes through `first`, then through `then`.
Realization series(const Realization& first, const Realization& then);
Realization parallel(const Realization& a, const Realization& b);
Realization transpose(const Realization& r);
/// Vertical concatenation [R1; R2; ...] (shared inputs).
Realization stack_rows(const std::vector<Realization>& parts);
/// Horizontal concatenation [R1 R2 ...] (shared outputs).
Realization stack_cols(const std::vector<Realization>& parts);
Realization block_diag(const std::vector<Realization>& parts);
Realization select_rows(const Realization& r, const std::vector<int>& rows);
Realization select_cols(const Realization& r, const std::vector<int>& cols);
Realization row_block(const Realization& r, int start, int count);
Realization col_block(const Realization& r, int start, int count);
/// Realization of R^{-1}; requires square invertible feedthrough.
Realization inverse(const Realization& r, double max_condition = 1e12);

/// Removes uncontrollable and unobservable states by orthogonal staircase
/// reduction. Always succeeds.
Realization minimal(const Realization& r, double rank_tol = kDefaultRankTol);

enum class PbhMode { controllable, observable };
bool pbh_test(const Realization& r, Complex z, PbhMode mode,
              double rank_tol = kDefaultRankTol);
/// True iff PBH passes in both modes at every eigenvalue of A.
bool is_minimal(const Realization& r, double rank_tol = kDefaultRankTol);

std::vector<Complex> eigenvalues(const Matrix& A);
double spectral_radius(const Matrix& A);
/// Spectral radius of the state matrix of minimal(r).
double spectral_radius(const Realization& r);
bool is_cb_bounded(const Realization& r,
                   StabilityDomain domain = StabilityDomain::unit_disc);

double max_singular_value(const CMatrix& m);

struct SupResult {
  double value = 0.0;
  double theta = 0.0;
};

/// Supremum over theta in [0, pi] of sigma_max(f(e^{i theta})) using a
/// uniform grid followed by golden-section refinement of the three largest
/// local maxima.
SupResult sup_sigma(const std::function<CMatrix(Complex)>& f,
                    int grid_points = 4096);

/// Refinement step of sup_sigma for values already sampled on the uniform
/// half-circle grid theta_k = pi k / (G - 1).
SupResult refine_sup(const std::vector<double>& sampled,
                     const std::function<CMatrix(Complex)>& f);

/// H-infinity norm; throws ErrorCode::unbounded if r is not stable.
double hinf_norm(const Realization& r, int grid_points = 4096);

/// Impulse-response coefficient: D for k = 0, C A^{k-1} B for k >= 1.
Matrix markov(const Realization& r, int k);
/// Coefficients 0..count-1 of the impulse response.
std::vector<Matrix> markov_sequence(const Realization& r, int count);

/// y = R * u with initial state x0 (empty x0 means zero).
SignalTrace star(const Realization& r, const SignalTrace& u,
                 const Vector& x0 = Vector());

/// Per-entry maximum modulus over a frequency grid. Points that hit a pole
/// are nudged off the circle; an identically zero entry stays zero anywhere.
Matrix entry_max_abs(const Realization& r,
                     const FrequencyGrid& grid = FrequencyGrid::chebyshev());
bool is_zero_on_grid(const Realization& r, double tol = kGridZeroTol);

/// Maximum over the grid of sigma_max(eval(a) - eval(b)).
double max_deviation(const Realization& a, const Realization& b,
                     const FrequencyGrid& grid);

}  // namespace nrf
