#pragma once

#include "nrf/closed_loop.hpp"
#include "nrf/controller.hpp"
#include "nrf/simulation.hpp"
#include "nrf/sparse_param.hpp"
#include "support.hpp"

namespace nrf::test {

/// Grid surrogate closed loop for a random point of the q = 1 parametrization.
struct GridDesign {
  GridScenario g;
  DcfBundle d;
  SparsityPattern pat;
  QParametrization p;
  Vector x;
  NrfPair pair;
  std::vector<AreaController> bank;
  AreaPartition part_w;
  ClosedLoopMaps maps;
  Realization Kw;
};

inline GridDesign make_grid_design(std::uint64_t seed, double scale = 0.5) {
  GridDesign s;
  s.g = surrogate_grid();
  s.d = build_dcf(s.g.plant, grid_block_diagonalizing_F(s.g), grid_deadbeat_L(s.g));
  s.pat = pattern_from_neighborhoods(s.g.partition, s.g.neighborhoods);
  s.p = parametrize(s.d, s.pat, 1);
  std::mt19937_64 rng(seed);
  s.x = random_matrix(rng, s.p.size(), 1, scale);
  s.pair = form_nrf_pair(s.d, q_from_x(s.p, s.x));
  s.bank = build_bank(s.pair.KD, s.g.partition);
  s.part_w = partition_with_bank(s.g.partition, s.bank);
  s.maps = build_maps(s.d, s.pair, s.bank);
  s.Kw = bank_realization(s.bank);
  return s;
}

inline const GridDesign& shared_grid_design() {
  static const GridDesign s = make_grid_design(2024);
  return s;
}

/// Every channel uniform in [-a, a].
inline ScenarioSignals random_signals(const GridDesign& s, int horizon, std::uint64_t seed,
                                      double a = 1.0) {
  return compose_signals(s.g.plant.nx(), s.g.plant.nu(), s.g.plant.nd(), s.Kw.order(),
                         horizon, seed, NoiseSettings::all(a));
}

}  // namespace nrf::test
