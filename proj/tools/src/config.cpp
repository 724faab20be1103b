#include "nrf_cli/config.hpp"

#include <algorithm>
#include <cmath>

namespace nrf::cli {

namespace {

constexpr const char* kSchemaHint = " (see 'Scenario configuration' in README.md)";

[[noreturn]] void fail(const std::string& msg) {
  throw Error(ErrorCode::config, msg + kSchemaHint);
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    fail("missing field '" + std::string(key) + "' in " + where);
  return j.at(key);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail("field '" + std::string(key) + "' has the wrong type");
  }
}

std::vector<double> number_list(const json& j, const std::string& what) {
  if (!j.is_array()) fail("'" + what + "' must be an array of numbers");
  std::vector<double> out;
  for (const json& v : j) {
    if (!v.is_number()) fail("'" + what + "' must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

double bound_value(const json& v, const std::string& what) {
  if (v.is_null()) return kNoBound;
  if (!v.is_number()) fail("'" + what + "' entries must be numbers or null");
  return v.get<double>();
}

void read_table(const json& j, int N, GammaTable& t, bool nulls_allowed,
                const std::string& what) {
  auto number = [&](const json& v, const std::string& w) {
    if (v.is_null() && !nulls_allowed) fail("'" + w + "' entries must be numbers");
    return bound_value(v, w);
  };
  if (j.contains("d")) {
    const json& d = j.at("d");
    if (!d.is_array() || static_cast<int>(d.size()) != N)
      fail("'" + what + ".d' must have one entry per area");
    for (int i = 0; i < N; ++i) t.d[i] = number(d[i], what + ".d");
  }
  for (const char* key : {"u", "c"}) {
    if (!j.contains(key)) continue;
    const json& m = j.at(key);
    Matrix& dst = std::string(key) == "u" ? t.u : t.c;
    if (!m.is_array() || static_cast<int>(m.size()) != N)
      fail("'" + what + "." + key + "' must be an N x N array");
    for (int i = 0; i < N; ++i) {
      if (!m[i].is_array() || static_cast<int>(m[i].size()) != N)
        fail("'" + what + "." + key + "' must be an N x N array");
      for (int k = 0; k < N; ++k) dst(i, k) = number(m[i][k], what + "." + key);
    }
  }
}

int area_index(const json& e, const char* key, int N, const std::string& what) {
  const int a = get_or<int>(e, key, 0);
  if (a < 1 || a > N) fail("'" + what + "." + key + "' must be an area number in 1.." +
                           std::to_string(N));
  return a - 1;
}

Realization target_from_json(const json& e, int rows, int cols, bool identity_default,
                             const std::string& what) {
  Realization t;
  try {
    t = scalar_tf(number_list(require(e, "num", what), what + ".num"),
                  number_list(require(e, "den", what), what + ".den"));
  } catch (const Error& err) {
    if (err.code() == ErrorCode::config) throw;
    fail("'" + what + "': " + err.what());
  }
  Matrix E;
  if (e.contains("gain")) {
    E = matrix_from_json(e.at("gain"), what + ".gain");
  } else if (identity_default && rows == cols) {
    E = Matrix::Identity(rows, cols);
  } else {
    fail("'" + what + "' needs a 'gain' matrix of size " + std::to_string(rows) + " x " +
         std::to_string(cols));
  }
  if (E.rows() != rows || E.cols() != cols)
    fail("'" + what + ".gain' must be " + std::to_string(rows) + " x " +
         std::to_string(cols));
  return scaled_target(t, E);
}

int block_rows(const AreaPartition& p, int i) {
  return p.size(Signal::x, i) + p.size(Signal::u, i);
}

SynthesisSpec parse_synthesis(const json& s, const AreaPartition& part,
                              const Neighborhoods& nb, const Plant& plant,
                              AlgorithmConfig& alg) {
  const int N = part.areas();
  alg.q = get_or<int>(s, "q", 1);
  const std::string mode = get_or<std::string>(s, "mode", "decouple_only");
  TargetMode tm;
  if (mode == "decouple_only")
    tm = TargetMode::decouple_only;
  else if (mode == "decouple_and_track")
    tm = TargetMode::decouple_and_track;
  else
    fail("unknown synthesis mode '" + mode + "'");
  SynthesisSpec spec = default_targets(part, tm);
  spec.norm = get_or<std::string>(s, "norm", "hinf");

  if (s.contains("weights")) {
    if (!s.at("weights").is_object()) fail("'synthesis.weights' must be an object");
    read_table(s.at("weights"), N, spec.weights, false, "synthesis.weights");
  }

  const json bounds = s.contains("bounds") ? s.at("bounds") : json("bootstrap");
  if (bounds.is_string()) {
    const std::string b = bounds.get<std::string>();
    if (b == "bootstrap")
      spec.bounds_mode = BoundsMode::bootstrap;
    else if (b == "none")
      spec.bounds_mode = BoundsMode::none;
    else
      fail("'synthesis.bounds' must be \"bootstrap\", \"none\" or a table");
  } else if (bounds.is_object()) {
    spec.bounds_mode = BoundsMode::explicit_values;
    read_table(bounds, N, spec.bounds, true, "synthesis.bounds");
  } else {
    fail("'synthesis.bounds' must be \"bootstrap\", \"none\" or a table");
  }

  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (spec.weights.c(i, j) > 0.0 || std::isfinite(spec.bounds.c(i, j)))
        fail("initial-condition constraints (weights.c, bounds.c) are reported after the "
             "search only; leave their weights at 0 and their bounds null");

  if (s.contains("targets")) {
    const json& t = s.at("targets");
    const int cols_d = plant.nu() + plant.nd();
    for (const json& e : get_or<json>(t, "d", json::array())) {
      const int i = area_index(e, "area", N, "synthesis.targets.d");
      spec.Td[i] = target_from_json(e, block_rows(part, i), cols_d, false,
                                    "synthesis.targets.d");
    }
    for (const json& e : get_or<json>(t, "u", json::array())) {
      const int i = area_index(e, "area", N, "synthesis.targets.u");
      spec.Tu[i][i] = target_from_json(e, block_rows(part, i), block_rows(part, i), true,
                                       "synthesis.targets.u");
    }
    for (const json& e : get_or<json>(t, "c", json::array())) {
      const int i = area_index(e, "area", N, "synthesis.targets.c");
      const int j = area_index(e, "from", N, "synthesis.targets.c");
      const int cols = part.size(Signal::x, j);
      spec.Tc[i][j] =
          target_from_json(e, block_rows(part, i), cols, false, "synthesis.targets.c");
    }
  }
  if (tm == TargetMode::decouple_and_track) {
    bool any = false;
    for (const auto& t : spec.Td) any = any || t.has_value();
    if (!any) fail("mode decouple_and_track needs at least one 'targets.d' entry");
  }

  if (s.contains("optimizer")) {
    const json& o = s.at("optimizer");
    OptimizerSettings& os = spec.optimizer;
    os.search_grid = get_or<int>(o, "search_grid", os.search_grid);
    os.verify_grid = get_or<int>(o, "verify_grid", os.verify_grid);
    os.starts = get_or<int>(o, "starts", os.starts);
    os.max_sweeps = get_or<int>(o, "max_sweeps", os.max_sweeps);
    os.tol = get_or<double>(o, "tol", os.tol);
    os.initial_step = get_or<double>(o, "initial_step", os.initial_step);
    os.perturbation = get_or<double>(o, "perturbation", os.perturbation);
    os.seed = get_or<unsigned long long>(o, "seed", os.seed);
    if (os.search_grid < 8 || os.verify_grid < 8 || os.starts < 1 || os.max_sweeps < 1 ||
        !(os.tol > 0.0) || !(os.initial_step > 0.0))
      fail("'synthesis.optimizer' settings out of range");
  }

  try {
    spec.validate(part, nb, plant.nd());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config) throw;
    fail(std::string("synthesis: ") + e.what());
  }
  return spec;
}

NoiseSettings parse_noise(const json& n) {
  NoiseSettings out;
  const std::string kind = get_or<std::string>(n, "kind", "uniform");
  if (kind == "uniform")
    out.kind = NoiseKind::uniform;
  else if (kind == "gaussian")
    out.kind = NoiseKind::gaussian;
  else
    fail("unknown noise kind '" + kind + "'");
  const double a = get_or<double>(n, "amplitude", 0.0);
  out.d = get_or<double>(n, "d", a);
  out.zeta = get_or<double>(n, "zeta", a);
  out.us1 = get_or<double>(n, "us1", a);
  out.us2 = get_or<double>(n, "us2", a);
  out.bs1 = get_or<double>(n, "bs1", a);
  out.bs2 = get_or<double>(n, "bs2", a);
  out.bf = get_or<double>(n, "bf", a);
  out.bw = get_or<double>(n, "bw", a);
  for (double v : {out.d, out.zeta, out.us1, out.us2, out.bs1, out.bs2, out.bf, out.bw})
    if (!(v >= 0.0) || !std::isfinite(v)) fail("noise amplitudes must be non-negative");
  return out;
}

const std::vector<std::string>& channel_names() {
  static const std::vector<std::string> names = {"d",   "zeta", "us1", "us2",
                                                 "bs1", "bs2",  "bf",  "bw"};
  return names;
}

SimulationSettings parse_simulation(const json& s, const fs::path& base, int nx) {
  SimulationSettings out;
  out.horizon = get_or<int>(s, "horizon", out.horizon);
  if (out.horizon <= 0) fail("'simulation.horizon' must be positive");
  out.seed = get_or<std::uint64_t>(s, "seed", out.seed);
  if (s.contains("noise")) out.noise = parse_noise(s.at("noise"));
  if (s.contains("files")) {
    for (const auto& [k, v] : s.at("files").items()) {
      const auto& names = channel_names();
      if (std::find(names.begin(), names.end(), k) == names.end())
        fail("unknown signal channel '" + k + "' in 'simulation.files'");
      const fs::path p = base / v.get<std::string>();
      if (!fs::exists(p)) fail("signal file '" + p.string() + "' does not exist");
      out.files[k] = p;
    }
  }
  if (s.contains("x0")) {
    out.xc = vector_from_json(s.at("x0"), "simulation.x0");
    if (out.xc.size() != nx) fail("'simulation.x0' must have n_x entries");
  }
  const std::string mode = get_or<std::string>(s, "mode", "synchronous");
  if (mode == "synchronous")
    out.mode = MessageMode::synchronous;
  else if (mode == "delayed_u")
    out.mode = MessageMode::delayed_u;
  else
    fail("unknown message mode '" + mode + "'");
  out.distributed = get_or<bool>(s, "distributed", true);
  return out;
}

}  // namespace

json coefficients_to_json(const GridCoefficients& c) {
  json lines = json::array();
  for (const GridLine& l : c.lines)
    lines.push_back({{"from", l.a + 1}, {"to", l.b + 1}, {"coupling", l.coupling}});
  return {{"Ts", c.Ts},           {"h", c.h},
          {"damping", c.damping}, {"lines", lines},
          {"surrogate", c.surrogate}, {"source", c.source}};
}

GridCoefficients coefficients_from_json(const json& in) {
  const json& j = in.contains("grid") ? in.at("grid") : in;
  GridCoefficients c;
  c.Ts = get_or<double>(j, "Ts", 0.2);
  c.h = number_list(require(j, "h", "grid coefficients"), "grid.h");
  c.damping = number_list(require(j, "damping", "grid coefficients"), "grid.damping");
  const json& lines = require(j, "lines", "grid coefficients");
  if (!lines.is_array()) fail("'grid.lines' must be an array");
  for (const json& l : lines) {
    GridLine g;
    g.a = get_or<int>(l, "from", 0) - 1;
    g.b = get_or<int>(l, "to", 0) - 1;
    if (!l.contains("coupling")) fail("missing field 'coupling' in a grid line");
    g.coupling = l.at("coupling").get<double>();
    c.lines.push_back(g);
  }
  c.surrogate = get_or<bool>(j, "surrogate", false);
  c.source = get_or<std::string>(j, "source", c.surrogate ? "surrogate" : "user");
  c.validate();
  return c;
}

json grid_scenario_document(const GridCoefficients& c) {
  return {
      {"schema", kScenarioSchema},
      {"name", "five-node-grid"},
      {"grid", coefficients_to_json(c)},
      {"gains", {{"strategy", "block_diagonalizing_F_deadbeat_L"}}},
      {"synthesis",
       {{"q", 1}, {"mode", "decouple_only"}, {"norm", "hinf"}, {"bounds", "none"}}},
      {"simulation",
       {{"horizon", 200},
        {"seed", 7},
        {"noise", {{"kind", "uniform"}, {"amplitude", 0.01}}},
        {"mode", "synchronous"}}},
  };
}

ScenarioConfig parse_config(json doc, const fs::path& base_dir,
                            const ConfigOverrides& overrides) {
  if (!doc.is_object()) fail("scenario document must be a JSON object");
  const std::string schema = get_or<std::string>(doc, "schema", "");
  if (schema != kScenarioSchema)
    fail("unsupported schema '" + schema + "', expected '" + kScenarioSchema + "'");

  if (overrides.coeffs) {
    if (!doc.contains("grid"))
      fail("--coeffs applies to grid scenarios only; this config has no 'grid' section");
    doc["grid"] = coefficients_to_json(coefficients_from_json(read_json(*overrides.coeffs)));
  }
  if (overrides.q) doc["synthesis"]["q"] = *overrides.q;
  if (overrides.seed) doc["simulation"]["seed"] = *overrides.seed;

  ScenarioConfig cfg;
  cfg.base_dir = base_dir;
  cfg.name = get_or<std::string>(doc, "name", "scenario");

  if (doc.contains("grid") && doc.contains("plant"))
    fail("a scenario has either a 'plant' or a 'grid' section, not both");
  if (doc.contains("grid")) {
    const GridScenario g = build_grid(coefficients_from_json(doc.at("grid")));
    cfg.grid = g.coeffs;
    cfg.plant = g.plant;
    cfg.partition = g.partition;
    cfg.neighborhoods = g.neighborhoods;
  } else {
    const json& p = require(doc, "plant", "scenario");
    cfg.plant.A = matrix_from_json(require(p, "A", "plant"), "plant.A");
    cfg.plant.Bu = matrix_from_json(require(p, "Bu", "plant"), "plant.Bu");
    cfg.plant.Bd = matrix_from_json(require(p, "Bd", "plant"), "plant.Bd");
    try {
      cfg.plant.validate();
    } catch (const Error& e) {
      fail(std::string("plant: ") + e.what());
    }
  }

  if (doc.contains("partition")) {
    std::vector<std::pair<int, int>> sizes;
    for (const json& a : doc.at("partition")) {
      if (!a.is_array() || a.size() != 2)
        fail("'partition' entries must be [n_x, n_u] pairs");
      sizes.emplace_back(a[0].get<int>(), a[1].get<int>());
    }
    try {
      cfg.partition = AreaPartition::build(sizes);
    } catch (const Error& e) {
      fail(std::string("partition: ") + e.what());
    }
  } else if (!cfg.grid) {
    fail("missing field 'partition' in scenario");
  }
  if (cfg.partition.total(Signal::x) != cfg.plant.nx() ||
      cfg.partition.total(Signal::u) != cfg.plant.nu())
    fail("partition sizes do not add up to the plant dimensions");

  const int N = cfg.partition.areas();
  if (doc.contains("neighborhoods")) {
    const json& nbj = doc.at("neighborhoods");
    if (!nbj.is_array() || static_cast<int>(nbj.size()) != N)
      fail("'neighborhoods' must list one array of area numbers per area");
    cfg.neighborhoods.assign(N, {});
    for (int i = 0; i < N; ++i)
      for (const json& v : nbj[i]) cfg.neighborhoods[i].push_back(v.get<int>() - 1);
    try {
      validate_neighborhoods(cfg.neighborhoods, N);
    } catch (const Error& e) {
      fail(std::string("neighborhoods: ") + e.what());
    }
  } else if (!cfg.grid) {
    cfg.neighborhoods = full_neighborhoods(N);
  }

  const json gains = get_or<json>(doc, "gains", json::object());
  cfg.algorithm.strategy = parse_gain_strategy(
      get_or<std::string>(gains, "strategy", "block_diagonalizing_F_deadbeat_L"));
  if (cfg.algorithm.strategy == GainStrategy::user_supplied) {
    Gains g;
    g.F = matrix_from_json(require(gains, "F", "gains"), "gains.F");
    g.L = matrix_from_json(require(gains, "L", "gains"), "gains.L");
    cfg.algorithm.gains = g;
  }
  cfg.algorithm.dcf_grid = get_or<int>(gains, "grid", cfg.algorithm.dcf_grid);

  cfg.synthesis = parse_synthesis(get_or<json>(doc, "synthesis", json::object()),
                                  cfg.partition, cfg.neighborhoods, cfg.plant,
                                  cfg.algorithm);
  if (cfg.algorithm.q < 1) fail("'synthesis.q' must be at least 1");
  cfg.simulation = parse_simulation(get_or<json>(doc, "simulation", json::object()),
                                    base_dir, cfg.plant.nx());
  cfg.document = std::move(doc);
  return cfg;
}

ScenarioConfig load_config(const fs::path& path, const ConfigOverrides& overrides) {
  if (!fs::exists(path)) fail("config file '" + path.string() + "' does not exist");
  return parse_config(read_json(path), fs::absolute(path).parent_path(), overrides);
}

ScenarioSignals scenario_signals(const ScenarioConfig& cfg, int nw) {
  const Plant& p = cfg.plant;
  const SimulationSettings& s = cfg.simulation;
  ScenarioSignals sig =
      compose_signals(p.nx(), p.nu(), p.nd(), nw, s.horizon, s.seed, s.noise);
  const std::map<std::string, std::pair<SignalTrace*, int>> slots = {
      {"d", {&sig.d, p.nd()}},     {"zeta", {&sig.zeta, p.nx()}},
      {"us1", {&sig.us1, p.nx()}}, {"us2", {&sig.us2, p.nu()}},
      {"bs1", {&sig.bs1, p.nx()}}, {"bs2", {&sig.bs2, p.nu()}},
      {"bf", {&sig.bf, p.nu()}},   {"bw", {&sig.bw, nw}}};
  for (const auto& [name, path] : s.files) {
    auto [dst, dim] = slots.at(name);
    SignalTrace t = read_signal_csv(path, dim);
    if (t.horizon() != s.horizon)
      fail("horizon mismatch: '" + path.string() + "' has " +
           std::to_string(t.horizon()) + " rows, simulation.horizon is " +
           std::to_string(s.horizon));
    *dst = std::move(t);
  }
  sig.check(p.nx(), p.nu(), p.nd(), nw);
  return sig;
}

}  // namespace nrf::cli
