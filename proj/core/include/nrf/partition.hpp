#pragma once

#include <utility>
#include <vector>

#include "nrf/lti.hpp"

namespace nrf {

enum class Signal { x, u, w };

/// Contiguous, ascending split of states, inputs and controller states into
/// N areas. Area indices are 0-based.
class AreaPartition {
 public:
  AreaPartition() = default;

  /// sizes[i] = (n_xi, n_ui). Requires N > 1 and all sizes positive.
  static AreaPartition build(const std::vector<std::pair<int, int>>& sizes);

  /// Returns a copy with controller-state sizes n_wi attached.
  AreaPartition with_controller_sizes(const std::vector<int>& nw) const;

  int areas() const { return static_cast<int>(nx_.size()); }
  int size(Signal s, int i) const;
  int offset(Signal s, int i) const;
  int total(Signal s) const;
  bool has_controller_sizes() const { return !nw_.empty(); }

  /// Global indices of area i for signal kind s.
  std::vector<int> indices(Signal s, int i) const;
  /// Area owning global index k of signal kind s.
  int area_of(Signal s, int k) const;

  /// S_si: total(s) x size(s, i) column selection of the identity.
  Matrix selector(Signal s, int i) const;
  /// Z_i = diag(S_xi, S_ui).
  Matrix z_selector(int i) const;
  /// Z_ci = diag(S_xi, S_wi).
  Matrix zc_selector(int i) const;

  Vector slice(const Vector& v, Signal s, int i) const;

 private:
  const std::vector<int>& sizes(Signal s) const;
  std::vector<int> nx_, nu_, nw_;
};

/// nb[i] lists the areas allowed to send information to area i.
using Neighborhoods = std::vector<std::vector<int>>;

void validate_neighborhoods(const Neighborhoods& nb, int N);
bool in_neighborhood(const Neighborhoods& nb, int i, int j);
Neighborhoods full_neighborhoods(int N);

}  // namespace nrf
