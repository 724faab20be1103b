#include "nrf_cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

namespace nrf::cli {

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorCode::config, msg);
}

const fs::path& require_path(const std::optional<fs::path>& p, const char* flag) {
  if (!p) config_error(std::string("missing required option ") + flag);
  return *p;
}

ConfigOverrides overrides_of(const CommandOptions& o) {
  ConfigOverrides ov;
  ov.coeffs = o.coeffs;
  ov.q = o.q;
  ov.seed = o.seed;
  return ov;
}

json gamma_to_json(const GammaTable& g) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json d = json::array(), u = json::array(), c = json::array();
  for (double v : g.d) d.push_back(num(v));
  for (Eigen::Index i = 0; i < g.u.rows(); ++i) {
    json ru = json::array(), rc = json::array();
    for (Eigen::Index j = 0; j < g.u.cols(); ++j) {
      ru.push_back(num(g.u(i, j)));
      rc.push_back(num(g.c(i, j)));
    }
    u.push_back(ru);
    c.push_back(rc);
  }
  return {{"d", d}, {"u", u}, {"c", c}};
}

GammaTable gamma_from_json(const json& j, int N) {
  GammaTable g = GammaTable::filled(N, kNoBound);
  auto num = [](const json& v) { return v.is_null() ? kNoBound : v.get<double>(); };
  for (int i = 0; i < N; ++i) {
    g.d[i] = num(j.at("d").at(i));
    for (int k = 0; k < N; ++k) {
      g.u(i, k) = num(j.at("u").at(i).at(k));
      g.c(i, k) = num(j.at("c").at(i).at(k));
    }
  }
  return g;
}

json neighborhoods_to_json(const Neighborhoods& nb) {
  json out = json::array();
  for (const auto& n : nb) {
    json row = json::array();
    for (int j : n) row.push_back(j + 1);
    out.push_back(row);
  }
  return out;
}

json plant_document(const ScenarioConfig& cfg) {
  json sizes = json::array();
  for (int i = 0; i < cfg.partition.areas(); ++i)
    sizes.push_back({cfg.partition.size(Signal::x, i), cfg.partition.size(Signal::u, i)});
  json doc = {{"A", to_json(cfg.plant.A)},
              {"Bu", to_json(cfg.plant.Bu)},
              {"Bd", to_json(cfg.plant.Bd)},
              {"partition", sizes},
              {"neighborhoods", neighborhoods_to_json(cfg.neighborhoods)}};
  if (cfg.grid) doc["grid"] = coefficients_to_json(*cfg.grid);
  return doc;
}

void write_dcf(const fs::path& dir, const DcfBundle& d) {
  const std::vector<std::pair<const char*, const Realization*>> factors = {
      {"N", &d.N},   {"M", &d.M},   {"X", &d.X},   {"Y", &d.Y},
      {"Nt", &d.Nt}, {"Mt", &d.Mt}, {"Xt", &d.Xt}, {"Yt", &d.Yt}};
  json files = json::object();
  for (const auto& [name, r] : factors) {
    const std::string file = std::string(name) + ".json";
    write_json(dir / file, to_json(*r));
    files[name] = file;
  }
  auto opt = [](const std::optional<int>& v) { return v ? json(*v) : json(nullptr); };
  write_json(dir / "manifest.json", {{"F", to_json(d.F)},
                                     {"L", to_json(d.L)},
                                     {"bezout_residual", d.bezout_residual},
                                     {"grid_size", d.grid_size},
                                     {"left_fir_degree", opt(d.left_fir_degree)},
                                     {"right_fir_degree", opt(d.right_fir_degree)},
                                     {"factors", files}});
}

json taps_to_json(const std::vector<Matrix>& taps) {
  json out = json::array();
  for (const Matrix& t : taps) out.push_back(to_json(t));
  return out;
}

json parametrization_document(const QParametrization& p, const ParticularSolution& ps) {
  json basis = json::array();
  for (int k = 0; k < p.size(); ++k)
    basis.push_back({{"row", p.basis_row[k] + 1}, {"taps", taps_to_json(p.basis[k])}});
  return {{"q", p.q},
          {"nu", p.nu},
          {"nx", p.nx},
          {"feasible", ps.feasible},
          {"residual", ps.residual},
          {"q0", taps_to_json(p.q0)},
          {"basis", basis}};
}

json bank_inputs(const AreaPartition& part) {
  json inputs = json::array();
  const int nu = part.total(Signal::u), nx = part.total(Signal::x);
  for (int c = 0; c < nu + nx; ++c) {
    const bool is_u = c < nu;
    const int k = is_u ? c : c - nu;
    inputs.push_back({{"column", c + 1},
                      {"signal", is_u ? "u_f+beta_f" : "x+beta_x"},
                      {"index", k + 1},
                      {"source_area", part.area_of(is_u ? Signal::u : Signal::x, k) + 1}});
  }
  return inputs;
}

void write_bank(const fs::path& dir, const Design& des, const AreaPartition& part) {
  json areas = json::array();
  for (const AreaController& a : des.bank) {
    json rows = json::array();
    for (const ControllerRow& r : des.rows) {
      if (part.area_of(Signal::u, r.index) != a.area) continue;
      rows.push_back({{"index", r.index + 1},
                      {"order", r.order()},
                      {"chi", r.chi},
                      {"realization", to_json(r.canonical)}});
    }
    const std::string file = "area_" + std::to_string(a.area + 1) + ".json";
    write_json(dir / file, {{"area", a.area + 1},
                            {"order", a.order()},
                            {"row_orders", a.row_orders},
                            {"wc", vector_to_json(a.wc)},
                            {"realization", to_json(a.r)},
                            {"rows", rows}});
    areas.push_back({{"area", a.area + 1}, {"file", file}, {"order", a.order()}});
  }
  write_json(dir / "manifest.json", {{"areas", areas}, {"inputs", bank_inputs(part)}});
}

void write_maps(const fs::path& dir, const ClosedLoopMaps& m) {
  const json rows = {{"x", m.nx}, {"u_f", m.nu}};
  write_json(dir / "F_Q.json",
             {{"realization", to_json(m.FQ)},
              {"columns", {{"beta_x", m.nx}, {"beta_u", m.nu}, {"beta_f", m.nu}, {"d", m.nd}}},
              {"rows", rows}});
  write_json(dir / "I_Q.json", {{"realization", to_json(m.IQ)},
                                {"columns", {{"x_c", m.nx}, {"w_c", m.nw}}},
                                {"rows", rows}});
}

json write_prediction(const fs::path& dir, const Design& des) {
  json areas = json::array();
  for (int i = 0; i < des.partition.areas(); ++i) {
    const std::string file = "area_" + std::to_string(i + 1) + ".json";
    try {
      const PredictionModel pm = prediction_model(des.maps, des.partition, i);
      write_json(dir / file, {{"area", i + 1},
                              {"A", to_json(pm.A)},
                              {"B1", to_json(pm.B1)},
                              {"B2", to_json(pm.B2)},
                              {"Cx", to_json(pm.Cx)},
                              {"Cu", to_json(pm.Cu)}});
      areas.push_back({{"area", i + 1}, {"file", file}, {"order", pm.order()}});
    } catch (const Error& e) {
      areas.push_back({{"area", i + 1}, {"file", nullptr}, {"error", e.what()}});
    }
  }
  const json manifest = {{"areas", areas}};
  write_json(dir / "manifest.json", manifest);
  return manifest;
}

std::string fixed(double v, int prec = 6) {
  if (!std::isfinite(v)) return "inf";
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

SignalTrace random_trace(std::mt19937_64& rng, int dim, int H, double a) {
  std::uniform_real_distribution<double> u(-a, a);
  SignalTrace t(dim, H);
  for (int k = 0; k < H; ++k)
    for (int r = 0; r < dim; ++r) t.data(r, k) = u(rng);
  return t;
}

Vector random_vector(std::mt19937_64& rng, int n, double a) {
  std::uniform_real_distribution<double> u(-a, a);
  Vector v(n);
  for (int k = 0; k < n; ++k) v(k) = u(rng);
  return v;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

bool VerifyReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

json VerifyReport::to_json() const {
  json arr = json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"value", c.value},
                   {"tolerance", c.tolerance},
                   {"detail", c.detail}});
  return {{"passed", passed()}, {"checks", arr}};
}

RunArtifacts load_run(const fs::path& dir) {
  RunArtifacts run;
  run.dir = dir;
  const fs::path report = dir / "synthesis_report.json";
  if (!fs::exists(report))
    config_error("'" + dir.string() + "' is not a design run (no synthesis_report.json)");
  run.report = read_json(report);
  if (run.report.value("status", "") != "ok")
    config_error("design run in '" + dir.string() + "' did not succeed (status " +
                 run.report.value("status", "unknown") + ")");
  run.config = parse_config(read_json(dir / "scenario.json"), dir);

  const json dcf = read_json(dir / "dcf" / "manifest.json");
  run.gains.F = matrix_from_json(dcf.at("F"), "dcf.F");
  run.gains.L = matrix_from_json(dcf.at("L"), "dcf.L");
  run.Q = realization_from_json(run.report.at("Q"), "Q");
  run.x = vector_from_json(run.report.at("x"), "x");

  const AreaPartition& part = run.config.partition;
  for (int i = 0; i < part.areas(); ++i) {
    const json a = read_json(dir / "bank" / ("area_" + std::to_string(i + 1) + ".json"));
    std::vector<ControllerRow> rows;
    for (const json& r : a.at("rows")) {
      ControllerRow row;
      row.index = r.at("index").get<int>() - 1;
      row.chi = r.at("chi").get<std::vector<double>>();
      row.canonical = realization_from_json(r.at("realization"), "bank row");
      rows.push_back(std::move(row));
    }
    AreaController ac = stack_area(rows, part, i);
    ac.wc = vector_from_json(a.at("wc"), "bank wc");
    if (ac.wc.size() != ac.order()) config_error("bank area initial state has wrong size");
    run.bank.push_back(std::move(ac));
    run.rows.push_back(std::move(rows));
  }
  run.FQ = realization_from_json(read_json(dir / "maps" / "F_Q.json").at("realization"),
                                 "F_Q");
  run.IQ = realization_from_json(read_json(dir / "maps" / "I_Q.json").at("realization"),
                                 "I_Q");
  return run;
}

VerifyReport verify_run(const RunArtifacts& run, const VerifyOptions& opt) {
  VerifyReport rep;
  auto add = [&](std::string name, double value, double tol, std::string detail = {}) {
    rep.checks.push_back({std::move(name), value <= tol, value, tol, std::move(detail)});
  };
  auto fail_check = [&](std::string name, const std::string& why) {
    rep.checks.push_back({std::move(name), false, 0.0, 0.0, why});
  };
  const ScenarioConfig& cfg = run.config;
  const AreaPartition& part = cfg.partition;

  std::optional<DcfBundle> d;
  try {
    d = build_dcf(cfg.plant, run.gains.F, run.gains.L, 512);
    add("bezout_identity", verify_bezout(*d, FrequencyGrid::unit_circle(512)), kBezoutTol);
  } catch (const Error& e) {
    fail_check("bezout_identity", e.what());
    return rep;
  }

  const SparsityPattern pat = pattern_from_neighborhoods(part, cfg.neighborhoods);
  add("sparsity_pattern", pattern_violation(*d, pat, run.Q), 1e-8,
      "Yt + Q Nt and Xt + Q Mt vanish outside the neighborhoods");

  const NrfPair pair = form_nrf_pair(*d, run.Q);
  const FrequencyGrid cheb = FrequencyGrid::chebyshev(64);
  double row_err = 0.0, zero_err = 0.0;
  int non_minimal = 0;
  for (const auto& area : run.rows)
    for (const ControllerRow& r : area) {
      const Realization kd_row = row_block(pair.KD, r.index, 1);
      double scale = 0.0;
      for (const Complex& z : cheb.points) scale = std::max(scale, kd_row.eval(z).norm());
      row_err = std::max(row_err,
                         max_deviation(r.canonical, kd_row, cheb) / std::max(1.0, scale));
      if (!is_minimal(r.canonical)) ++non_minimal;
      for (int c = 0; c < pat.mask.cols(); ++c) {
        if (pat.mask(r.index, c) != 0 && c != r.index) continue;
        zero_err = std::max(zero_err, r.canonical.B().col(c).cwiseAbs().maxCoeff());
        zero_err = std::max(zero_err, std::abs(r.canonical.D()(0, c)));
      }
    }
  add("row_realizations_match", row_err, 1e-8, "canonical rows vs [Phi Gamma] rows");
  add("row_realizations_minimal", non_minimal, 0.0, "rows failing the PBH test");
  add("row_structural_zeros", zero_err, 0.0, "B and D columns of forbidden entries");

  try {
    check_comm_constraints(run.bank, part, cfg.neighborhoods);
    add("communication_constraints", 0.0, 0.0);
  } catch (const ViolationError& e) {
    add("communication_constraints", static_cast<double>(e.pairs().size()), 0.0, e.what());
  }

  ClosedLoopMaps maps;
  try {
    maps = build_maps(*d, pair, run.bank);
  } catch (const Error& e) {
    fail_check("closed_loop_stability", e.what());
    return rep;
  }
  add("closed_loop_stability",
      std::max(spectral_radius(maps.FQ), spectral_radius(maps.IQ)), 1.0 - 1e-12,
      "spectral radius of minimal F_Q and I_Q");
  add("exported_maps_round_trip",
      std::max(max_deviation(maps.FQ, run.FQ, cheb), max_deviation(maps.IQ, run.IQ, cheb)),
      1e-9);

  const Realization Kw = bank_realization(run.bank);
  const int nx = cfg.plant.nx(), nu = cfg.plant.nu(), nd = cfg.plant.nd();
  const int nw = Kw.order();
  std::mt19937_64 rng(opt.seed);
  double thm = 0.0;
  for (int s = 0; s < opt.theorem_scenarios; ++s) {
    const int H = opt.theorem_horizon;
    ScenarioSignals sig = ScenarioSignals::zeros(nx, nu, nd, nw, H);
    for (SignalTrace* t : {&sig.d, &sig.zeta, &sig.us1, &sig.us2, &sig.bs1, &sig.bs2,
                           &sig.bf})
      *t = random_trace(rng, t->dim(), H, 1.0);
    const Vector xc = random_vector(rng, nx, 1.0), wc = random_vector(rng, nw, 1.0);
    const LoopTrace tr = simulate_monolithic(cfg.plant, Kw, sig, xc, wc);
    Vector ic(nx + nw);
    ic << xc, wc;
    const Matrix rec = star(maps.FQ, sig.ds()).data + impulse_path(maps.IQ, ic, H).data;
    thm = std::max(thm, max_abs(tr.xuf() - rec));
  }
  add("closed_loop_identity", thm, 1e-6,
      "simulation vs F_Q * d_s + I_Q impulse path, " +
          std::to_string(opt.theorem_scenarios) + " scenarios");

  double eq = 0.0;
  for (int s = 0; s < opt.equivalence_scenarios; ++s) {
    const int H = opt.equivalence_horizon;
    ScenarioSignals sig = compose_signals(nx, nu, nd, nw, H, rng(), NoiseSettings::all(1.0));
    const Vector xc = random_vector(rng, nx, 1.0), wc = random_vector(rng, nw, 1.0);
    const LoopTrace mono = simulate_monolithic(cfg.plant, Kw, sig, xc, wc);
    const LoopTrace dist =
        simulate_distributed(cfg.plant, run.bank, part, cfg.neighborhoods, sig, xc, wc);
    eq = std::max(eq, max_abs_difference(mono, dist));
  }
  add("distributed_equivalence", eq, 1e-10,
      std::to_string(opt.equivalence_scenarios) + " scenarios");

  if (run.report.contains("gamma")) {
    Design des;
    des.Q = run.Q;
    des.pair = pair;
    des.bank = run.bank;
    des.partition = partition_with_bank(part, run.bank);
    des.maps = maps;
    const GammaTable g = constraint_norms(des, cfg.synthesis,
                                          cfg.synthesis.optimizer.verify_grid);
    const GammaTable reported = gamma_from_json(run.report.at("gamma"), part.areas());
    double diff = 0.0;
    for (int i = 0; i < part.areas(); ++i)
      diff = std::max(diff, std::abs(g.d[i] - reported.d[i]));
    diff = std::max({diff, max_abs(g.u - reported.u), max_abs(g.c - reported.c)});
    add("reported_gamma", diff, 1e-9, "independently recomputed constraint norms");
  }
  return rep;
}

int cmd_example_grid(const CommandOptions& o, std::ostream& log) {
  const fs::path& out = require_path(o.out, "--out");
  const GridCoefficients c = o.coeffs ? coefficients_from_json(read_json(*o.coeffs))
                                      : surrogate_grid_coefficients();
  json doc = grid_scenario_document(c);
  if (o.q) doc["synthesis"]["q"] = *o.q;
  if (o.seed) doc["simulation"]["seed"] = *o.seed;
  const ScenarioConfig cfg = parse_config(doc, out);
  write_json(out / "scenario.json", cfg.document);
  write_json(out / "plant.json", plant_document(cfg));
  log << "grid scenario (" << (c.surrogate ? "surrogate coefficients" : c.source)
      << ") written to " << (out / "scenario.json").string() << "\n";
  return kExitOk;
}

int cmd_design(const CommandOptions& o, std::ostream& log) {
  const fs::path& out = require_path(o.out, "--out");
  const ScenarioConfig cfg = load_config(require_path(o.config, "--config"), overrides_of(o));
  fs::create_directories(out);
  write_json(out / "scenario.json", cfg.document);
  write_json(out / "plant.json", plant_document(cfg));

  const DesignReport rep = run_algorithm1(cfg.plant, cfg.partition, cfg.neighborhoods,
                                          cfg.synthesis, cfg.algorithm);
  json artifacts = {"scenario.json", "plant.json"};
  json report = {{"status", to_string(rep.status)},
                 {"message", rep.message},
                 {"hints", rep.hints},
                 {"seconds", rep.seconds},
                 {"q", cfg.algorithm.q},
                 {"gain_strategy", to_string(cfg.algorithm.strategy)}};
  if (rep.dcf) {
    write_dcf(out / "dcf", *rep.dcf);
    artifacts.push_back("dcf/manifest.json");
    if (rep.status != DesignStatus::factorization_failed) {
      write_json(out / "parametrization.json",
                 parametrization_document(rep.param, rep.particular));
      artifacts.push_back("parametrization.json");
    }
  }
  if (rep.result) {
    const SynthesisResult& r = *rep.result;
    write_bank(out / "bank", r.design, cfg.partition);
    write_maps(out / "maps", r.design.maps);
    const json pred = write_prediction(out / "prediction", r.design);
    for (const char* f : {"bank/manifest.json", "maps/F_Q.json", "maps/I_Q.json",
                          "prediction/manifest.json"})
      artifacts.push_back(f);
    report["x"] = vector_to_json(r.x);
    report["Q"] = to_json(r.design.Q);
    report["gamma"] = gamma_to_json(r.gamma);
    report["bounds"] = gamma_to_json(r.bounds);
    report["weights"] = gamma_to_json(cfg.synthesis.weights);
    report["objective"] = r.objective;
    report["search_objective"] = r.search_objective;
    report["objective_log"] = r.log;
    report["start_logs"] = r.start_logs;
    report["sweeps"] = r.sweeps;
    report["evaluations"] = r.evaluations;
    report["bound_hits"] = r.bound_hits;
    report["parameters"] = rep.param.size();
    report["prediction"] = pred;
  }
  report["artifacts"] = artifacts;
  write_json(out / "synthesis_report.json", report);

  log << "design: " << to_string(rep.status);
  if (!rep.message.empty()) log << " (" << rep.message << ")";
  log << " in " << fixed(rep.seconds, 3) << " s\n";
  for (const auto& h : rep.hints) log << "  hint: " << h << "\n";
  if (rep.status != DesignStatus::ok) return kExitInfeasible;
  log << "  objective " << fixed(rep.result->objective) << " with "
      << rep.param.size() << " parameters\n";
  return kExitOk;
}

int cmd_verify(const CommandOptions& o, std::ostream& log) {
  const fs::path& out = require_path(o.out, "--out");
  const RunArtifacts run = load_run(out);
  VerifyOptions opt;
  if (o.seed) opt.seed = *o.seed;
  const VerifyReport rep = verify_run(run, opt);
  write_json(out / "verify_report.json", rep.to_json());
  for (const auto& c : rep.checks)
    log << (c.passed ? "PASS " : "FAIL ") << c.name << " " << fixed(c.value, 3)
        << " (tol " << fixed(c.tolerance, 3) << ")"
        << (c.detail.empty() ? "" : " " + c.detail) << "\n";
  return rep.passed() ? kExitOk : kExitVerification;
}

int cmd_simulate(const CommandOptions& o, std::ostream& log) {
  const fs::path& out = require_path(o.out, "--out");
  const ScenarioConfig cfg = load_config(require_path(o.config, "--config"), overrides_of(o));
  const RunArtifacts run = load_run(out);
  const Plant& p = run.config.plant;
  if (cfg.plant.nx() != p.nx() || cfg.plant.nu() != p.nu() || cfg.plant.nd() != p.nd())
    config_error("simulation config does not match the plant of the design run");
  const Realization Kw = bank_realization(run.bank);
  const ScenarioSignals sig = scenario_signals(cfg, Kw.order());
  const Vector xc = cfg.simulation.xc.size() ? cfg.simulation.xc : Vector::Zero(p.nx());
  Vector wc(Kw.order());
  for (int i = 0, k = 0; i < static_cast<int>(run.bank.size()); ++i) {
    wc.segment(k, run.bank[i].order()) = run.bank[i].wc;
    k += run.bank[i].order();
  }
  const LoopTrace tr =
      cfg.simulation.distributed
          ? simulate_distributed(p, run.bank, run.config.partition,
                                 run.config.neighborhoods, sig, xc, wc,
                                 cfg.simulation.mode)
          : simulate_monolithic(p, Kw, sig, xc, wc);
  const std::string csv = trace_csv(tr);
  write_text(out / "trace.csv", csv);
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(cfg.document.dump())));
  char csv_hash[32];
  std::snprintf(csv_hash, sizeof csv_hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(csv)));
  write_json(out / "trace.json",
             {{"seed", cfg.simulation.seed},
              {"config_hash", hash},
              {"csv_hash", csv_hash},
              {"horizon", cfg.simulation.horizon},
              {"distributed", cfg.simulation.distributed},
              {"mode", cfg.simulation.mode == MessageMode::synchronous ? "synchronous"
                                                                        : "delayed_u"},
              {"columns",
               {{"x", tr.x.dim()}, {"uf", tr.uf.dim()}, {"u", tr.u.dim()}, {"w", tr.w.dim()}}}});
  log << "simulated " << cfg.simulation.horizon << " steps (seed " << cfg.simulation.seed
      << "), trace written to " << (out / "trace.csv").string() << "\n";
  return kExitOk;
}

int cmd_report(const CommandOptions& o, std::ostream& log) {
  const fs::path& out = require_path(o.out, "--out");
  const fs::path rp = out / "synthesis_report.json";
  if (!fs::exists(rp)) config_error("no synthesis_report.json in '" + out.string() + "'");
  const json r = read_json(rp);
  std::ostringstream os;
  os << "status: " << r.value("status", "unknown") << "\n";
  if (!r.value("message", "").empty()) os << "message: " << r.value("message", "") << "\n";
  os << "q: " << r.value("q", 0) << "\n";
  os << "design time: " << fixed(r.value("seconds", 0.0), 3) << " s\n";
  if (r.contains("gamma")) {
    const int N = static_cast<int>(r["gamma"]["d"].size());
    const GammaTable g = gamma_from_json(r["gamma"], N);
    const GammaTable b = gamma_from_json(r["bounds"], N);
    os << "parameters: " << r.value("parameters", 0) << "\n";
    os << "objective: " << fixed(r.value("objective", 0.0)) << " (search "
       << fixed(r.value("search_objective", 0.0)) << ", " << r.value("sweeps", 0)
       << " sweeps)\n";
    os << "x:";
    for (const auto& v : r["x"]) os << " " << fixed(v.get<double>());
    os << "\n\ndisturbance gamma (area: value / bound)\n";
    for (int i = 0; i < N; ++i)
      os << "  " << i + 1 << ": " << fixed(g.d[i]) << " / " << fixed(b.d[i]) << "\n";
    for (const auto& [label, mat] : {std::pair<const char*, const Matrix*>{"coupling", &g.u},
                                     {"initial-condition", &g.c}}) {
      os << "\n" << label << " gamma (row = affected area, column = source area)\n";
      for (int i = 0; i < N; ++i) {
        os << " ";
        for (int j = 0; j < N; ++j) os << " " << std::setw(10) << fixed((*mat)(i, j), 4);
        os << "\n";
      }
    }
    if (!r["bound_hits"].empty()) {
      os << "\nconstraints at their bound:\n";
      for (const auto& h : r["bound_hits"]) os << "  " << h.get<std::string>() << "\n";
    }
  }
  for (const auto& h : r.value("hints", json::array()))
    os << "hint: " << h.get<std::string>() << "\n";
  const fs::path vp = out / "verify_report.json";
  if (fs::exists(vp)) {
    const json v = read_json(vp);
    os << "\nverification: " << (v.value("passed", false) ? "all checks passed" : "FAILED")
       << "\n";
    for (const auto& c : v["checks"])
      os << "  " << (c.value("passed", false) ? "PASS " : "FAIL ")
         << c.value("name", "") << " " << fixed(c.value("value", 0.0), 3) << "\n";
  } else {
    os << "\nverification: not run\n";
  }
  write_text(out / "summary.txt", os.str());
  log << os.str();
  return kExitOk;
}

int run_command(const std::string& name, const CommandOptions& o, std::ostream& log,
                std::ostream& err) {
  try {
    if (name == "example-grid") return cmd_example_grid(o, log);
    if (name == "design") return cmd_design(o, log);
    if (name == "verify") return cmd_verify(o, log);
    if (name == "simulate") return cmd_simulate(o, log);
    if (name == "report") return cmd_report(o, log);
    err << "unknown command '" << name << "'\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return e.code() == ErrorCode::config || e.code() == ErrorCode::io ? kExitConfig
                                                                      : kExitFailure;
  } catch (const json::exception& e) {
    err << "error [config]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace nrf::cli
