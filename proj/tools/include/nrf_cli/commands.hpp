#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nrf_cli/config.hpp"

namespace nrf::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitInfeasible = 3,
  kExitVerification = 4,
};

struct CommandOptions {
  std::optional<fs::path> config;
  std::optional<fs::path> out;
  std::optional<fs::path> coeffs;
  std::optional<std::uint64_t> seed;
  std::optional<int> q;
};

/// Everything a design run leaves on disk, read back.
struct RunArtifacts {
  fs::path dir;
  ScenarioConfig config;
  Gains gains;
  Realization Q;
  Vector x;
  std::vector<AreaController> bank;
  std::vector<std::vector<ControllerRow>> rows;  // per area, canonical forms only
  Realization FQ;
  Realization IQ;
  json report;
};

RunArtifacts load_run(const fs::path& dir);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyOptions {
  int theorem_scenarios = 5;
  int theorem_horizon = 200;
  int equivalence_scenarios = 5;
  int equivalence_horizon = 500;
  std::uint64_t seed = 1;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool passed() const;
  json to_json() const;
};

VerifyReport verify_run(const RunArtifacts& run, const VerifyOptions& opt = {});

int cmd_example_grid(const CommandOptions& o, std::ostream& log);
int cmd_design(const CommandOptions& o, std::ostream& log);
int cmd_verify(const CommandOptions& o, std::ostream& log);
int cmd_simulate(const CommandOptions& o, std::ostream& log);
int cmd_report(const CommandOptions& o, std::ostream& log);

/// Dispatches by name and maps exceptions to exit codes.
int run_command(const std::string& name, const CommandOptions& o, std::ostream& log,
                std::ostream& err);

}  // namespace nrf::cli
