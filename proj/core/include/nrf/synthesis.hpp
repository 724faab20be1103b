#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nrf/closed_loop.hpp"
#include "nrf/controller.hpp"
#include "nrf/dcf.hpp"
#include "nrf/sparse_param.hpp"

namespace nrf {

enum class TargetMode { decouple_only, decouple_and_track };
enum class BoundsMode { bootstrap, none, explicit_values };

inline constexpr double kNoBound = std::numeric_limits<double>::infinity();

/// Square-indexed table over areas; entry (i, j) for the coupling and
/// initial-condition constraints, entry (i, 0) for the disturbance ones.
struct GammaTable {
  std::vector<double> d;
  Matrix u;
  Matrix c;

  static GammaTable filled(int N, double value);
};

struct OptimizerSettings {
  int search_grid = 256;     // half-circle points used during the search
  int verify_grid = 4096;    // points for the post-hoc norm computation
  int starts = 2;            // x = 0 plus deterministic perturbations
  int max_sweeps = 200;
  double tol = 1e-6;         // objective improvement per sweep
  double initial_step = 0.1;
  double perturbation = 0.05;
  unsigned long long seed = 0x5eedULL;
};

/// Model-matching problem over the closed-loop maps.
/// Absent targets are identically zero.
struct SynthesisSpec {
  int areas = 0;
  std::vector<std::optional<Realization>> Td;
  std::vector<std::vector<std::optional<Realization>>> Tu;
  std::vector<std::vector<std::optional<Realization>>> Tc;
  GammaTable weights;
  GammaTable bounds;
  BoundsMode bounds_mode = BoundsMode::bootstrap;
  std::string norm = "hinf";
  OptimizerSettings optimizer;

  /// Throws invalid_argument on negative weights, unstable targets,
  /// non-H-infinity norms or structurally forbidden targets.
  void validate(const AreaPartition& part, const Neighborhoods& nb, int nd) const;
};

SynthesisSpec default_targets(const AreaPartition& part, TargetMode mode);

/// t(z) = num(z) / den(z) with coefficients in descending powers of z.
/// Throws invalid_argument if improper or unstable.
Realization scalar_tf(const std::vector<double>& num, const std::vector<double>& den);
/// E t(z), where E is rows x cols.
Realization scaled_target(const Realization& t, const Matrix& E);

/// Everything produced from one parameter vector.
struct Design {
  Vector x;
  Realization Q;
  NrfPair pair;
  std::vector<ControllerRow> rows;
  std::vector<AreaController> bank;
  AreaPartition partition;  // with controller-state sizes
  ClosedLoopMaps maps;
};

Design realize_design(const DcfBundle& d, const QParametrization& p, const Vector& x,
                      const AreaPartition& part);

/// H-infinity distance of every constrained block to its target, computed
/// from a fresh realization of Q(x).
GammaTable constraint_norms(const DcfBundle& d, const QParametrization& p,
                            const Vector& x, const SynthesisSpec& spec,
                            const AreaPartition& part, Design* design = nullptr);
GammaTable constraint_norms(const Design& design, const SynthesisSpec& spec,
                            int grid_points = 4096);

/// Same norms, sampled on `grid` only (no refinement).
GammaTable sampled_norms(const Design& design, const SynthesisSpec& spec,
                         const FrequencyGrid& grid);

double objective(const GammaTable& gamma, const SynthesisSpec& spec);

struct SynthesisResult {
  Vector x;
  GammaTable gamma;  // post-hoc, from constraint_norms
  GammaTable bounds;
  double objective = 0.0;          // post-hoc
  double search_objective = 0.0;   // on the search grid
  std::vector<double> log;         // search objective of the winning start
  std::vector<std::vector<double>> start_logs;
  int sweeps = 0;
  int evaluations = 0;
  std::vector<std::string> bound_hits;
  Design design;
};

/// Human-readable names of the constraints that sit at (or above) their
/// bound within relative tolerance `rel`.
std::vector<std::string> bound_hits(const GammaTable& gamma, const GammaTable& bounds,
                                    double rel = 1e-6);

/// Fixes bounds at the values achieved by x = 0 if the spec asks for it.
GammaTable bootstrap_bounds(const DcfBundle& d, const QParametrization& p,
                            const SynthesisSpec& spec, const AreaPartition& part);

/// Throws Error(invalid_argument) if x = 0 violates the bounds.
SynthesisResult solve(const SynthesisSpec& spec, const DcfBundle& d,
                      const QParametrization& p, const AreaPartition& part);

enum class DesignStatus { ok, factorization_failed, sparsity_infeasible, bounds_infeasible };
const char* to_string(DesignStatus s);

struct AlgorithmConfig {
  GainStrategy strategy = GainStrategy::block_diagonalizing_F_deadbeat_L;
  std::optional<Gains> gains;  // used by user_supplied
  int q = 1;
  int dcf_grid = 512;
};

struct DesignReport {
  DesignStatus status = DesignStatus::ok;
  std::string message;
  std::vector<std::string> hints;
  std::optional<DcfBundle> dcf;
  SparsityPattern pattern;
  QParametrization param;
  ParticularSolution particular;
  std::optional<SynthesisResult> result;
  double seconds = 0.0;
};

DesignReport run_algorithm1(const Plant& plant, const AreaPartition& part,
                            const Neighborhoods& nb, SynthesisSpec spec,
                            const AlgorithmConfig& config);

}  // namespace nrf
