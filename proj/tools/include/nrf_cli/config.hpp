#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "nrf/grid_example.hpp"
#include "nrf/simulation.hpp"
#include "nrf/synthesis.hpp"
#include "nrf_cli/io.hpp"

namespace nrf::cli {

inline constexpr const char* kScenarioSchema = "nrf-forge/scenario-v1";

struct SimulationSettings {
  int horizon = 200;
  std::uint64_t seed = 7;
  NoiseSettings noise;
  std::map<std::string, fs::path> files;  // channel name -> CSV
  Vector xc;                               // empty means zero
  MessageMode mode = MessageMode::synchronous;
  bool distributed = true;
};

struct ScenarioConfig {
  std::string name;
  fs::path base_dir;
  Plant plant;
  AreaPartition partition;
  Neighborhoods neighborhoods;
  std::optional<GridCoefficients> grid;
  AlgorithmConfig algorithm;
  SynthesisSpec synthesis;
  SimulationSettings simulation;
  json document;  // effective document after overrides
};

struct ConfigOverrides {
  std::optional<fs::path> coeffs;
  std::optional<int> q;
  std::optional<std::uint64_t> seed;
};

ScenarioConfig parse_config(json doc, const fs::path& base_dir,
                            const ConfigOverrides& overrides = {});
ScenarioConfig load_config(const fs::path& path, const ConfigOverrides& overrides = {});

json coefficients_to_json(const GridCoefficients& c);
/// Accepts either a bare coefficient object or a document with a "grid" key.
GridCoefficients coefficients_from_json(const json& j);

/// Scenario document for the five-node grid: deadbeat design, q = 1,
/// decouple-only targets, no bounds.
json grid_scenario_document(const GridCoefficients& c);

/// Loads every file-backed channel and fills the rest with seeded noise.
ScenarioSignals scenario_signals(const ScenarioConfig& cfg, int nw);

}  // namespace nrf::cli
