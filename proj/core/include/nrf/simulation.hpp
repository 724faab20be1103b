#pragma once

#include <cstdint>
#include <string>

#include "nrf/controller.hpp"
#include "nrf/dcf.hpp"
#include "nrf/partition.hpp"

namespace nrf {

/// Exogenous and shaping signals of one scenario. Every trace has the same
/// horizon; absent channels are zero.
struct ScenarioSignals {
  SignalTrace d;     // n_d
  SignalTrace zeta;  // n_x, measurement error
  SignalTrace us1;   // n_x, state shaping input
  SignalTrace us2;   // n_u, input shaping input
  SignalTrace bs1;   // n_x
  SignalTrace bs2;   // n_u
  SignalTrace bf;    // n_u, transmission error on u_f
  SignalTrace bw;    // n_w, error on the reported controller state
  std::uint64_t seed = 0;

  static ScenarioSignals zeros(int nx, int nu, int nd, int nw, int horizon);

  int horizon() const { return d.horizon(); }
  SignalTrace beta_x() const;
  SignalTrace beta_u() const;
  /// [beta_x; beta_u; beta_f; d].
  SignalTrace ds() const;
  /// d_s with u_s1 = u_s2 = 0.
  SignalTrace exogenous_ds() const;
  /// [u_s1; u_s2].
  SignalTrace shaping() const;
  void check(int nx, int nu, int nd, int nw) const;
};

enum class NoiseKind { uniform, gaussian };

/// Per-channel amplitudes; uniform draws lie in [-a, a], gaussian draws have
/// standard deviation a.
struct NoiseSettings {
  NoiseKind kind = NoiseKind::uniform;
  double d = 0.0, zeta = 0.0, us1 = 0.0, us2 = 0.0;
  double bs1 = 0.0, bs2 = 0.0, bf = 0.0, bw = 0.0;

  static NoiseSettings all(double amplitude, NoiseKind kind = NoiseKind::uniform);
};

/// Channels are drawn in the order d, zeta, us1, us2, bs1, bs2, bf, bw from
/// one std::mt19937_64 seeded with `seed`; each sample column is filled
/// before the next time step.
ScenarioSignals compose_signals(int nx, int nu, int nd, int nw, int horizon,
                                std::uint64_t seed, const NoiseSettings& noise);

struct LoopTrace {
  SignalTrace x;
  SignalTrace uf;
  SignalTrace u;
  SignalTrace w;
  SignalTrace w_reported;  // w + beta_w, the copy handed to upper layers
  std::uint64_t seed = 0;

  /// Stacked [x; u_f].
  Matrix xuf() const;
};

LoopTrace simulate_monolithic(const Plant& plant, const Realization& bank,
                              const ScenarioSignals& s, const Vector& xc,
                              const Vector& wc);

enum class MessageMode {
  synchronous,
  /// Off-spec: u_f messages arrive one step late.
  delayed_u,
};

LoopTrace simulate_distributed(const Plant& plant,
                               const std::vector<AreaController>& bank,
                               const AreaPartition& part, const Neighborhoods& nb,
                               const ScenarioSignals& s, const Vector& xc,
                               const Vector& wc,
                               MessageMode mode = MessageMode::synchronous);

double max_abs_difference(const LoopTrace& a, const LoopTrace& b);

}  // namespace nrf
