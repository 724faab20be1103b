#include <iostream>

#include <CLI11.hpp>

#include "nrf_cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Distributed-control synthesis with network realization functions"};
  app.require_subcommand(1, 1);
  nrf::cli::CommandOptions opts;
  std::string config, out, coeffs;
  std::uint64_t seed = 0;
  int q = 0;

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"example-grid", "write the five-node grid scenario"},
      {"design", "run the design procedure and export artifacts"},
      {"verify", "check the artifacts of a design run"},
      {"simulate", "simulate the closed loop of a design run"},
      {"report", "summarize a design run"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "scenario document");
    sub->add_option("--out", out, "output / run directory");
    sub->add_option("--seed", seed, "simulation or verification seed");
    sub->add_option("--q", q, "FIR degree of the parameter")->check(CLI::PositiveNumber);
    sub->add_option("--coeffs", coeffs, "grid coefficient document");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : nrf::cli::kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (!config.empty()) opts.config = config;
  if (!out.empty()) opts.out = out;
  if (!coeffs.empty()) opts.coeffs = coeffs;
  if (sub->count("--seed")) opts.seed = seed;
  if (sub->count("--q")) opts.q = q;
  return nrf::cli::run_command(sub->get_name(), opts, std::cout, std::cerr);
}
