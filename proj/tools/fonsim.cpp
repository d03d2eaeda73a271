// fonsim: simulate the coupled investor-opinion/price model, sweep its
// parameter grids, and run the combined-uncertainty estimation pipeline on
// price CSVs.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fon/estimator.hpp"
#include "fon/market.hpp"
#include "fon/montecarlo.hpp"
#include "fon/numio.hpp"
#include "fon/rng.hpp"
#include "fon/verify.hpp"

namespace {

using nlohmann::json;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

[[noreturn]] void bad_field(const std::string& what) {
  throw std::invalid_argument(what);
}

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) bad_field(where + ": unknown field '" + key + "'");
  }
}

double get_num(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) bad_field(key + ": expected a number");
  return j[key].get<double>();
}

int get_int(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) bad_field(key + ": expected an integer");
  return j[key].get<int>();
}

bool get_bool(const json& j, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) bad_field(key + ": expected a boolean");
  return j[key].get<bool>();
}

std::string get_str(const json& j, const std::string& key,
                    const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) bad_field(key + ": expected a string");
  return j[key].get<std::string>();
}

fon::MarketScheme parse_scheme(const std::string& s) {
  if (s == "local") return fon::MarketScheme::Local;
  if (s == "global") return fon::MarketScheme::Global;
  if (s == "realprice") return fon::MarketScheme::RealPrice;
  bad_field("scheme: expected local|global|realprice, got '" + s + "'");
}

fon::ConvergenceOptions parse_convergence(const json& cfg) {
  fon::ConvergenceOptions conv;
  if (!cfg.contains("convergence")) return conv;
  const json& j = cfg["convergence"];
  require_keys(j, {"tol", "window", "group_tol"}, "convergence");
  conv.tol = get_num(j, "tol", conv.tol);
  conv.window = get_int(j, "window", conv.window);
  conv.group_tol = get_num(j, "group_tol", conv.group_tol);
  if (!(conv.tol >= 0.0)) bad_field("convergence.tol: must be >= 0");
  if (conv.window < 1) bad_field("convergence.window: must be >= 1");
  if (!(conv.group_tol > 0.0)) bad_field("convergence.group_tol: must be > 0");
  return conv;
}

struct SimulateConfig {
  fon::MarketParams params;
  fon::InitialRecipe recipe;
  int steps = 1000;
  bool stop_on_convergence = false;
  fon::ConvergenceOptions convergence;
  std::uint64_t seed = 1;
};

SimulateConfig parse_simulate(const json& cfg) {
  require_keys(cfg,
               {"mode", "scheme", "n", "a", "d", "b", "sigma_eps",
                "sigma_floor", "behavior", "manipulators", "p0", "pbar0",
                "sigma0", "steps", "max_steps", "stop_on_convergence",
                "convergence", "seed"},
               "simulate config");
  SimulateConfig out;
  const int n = get_int(cfg, "n", 60);
  if (n < 1) bad_field("n: must be >= 1");
  const double a = get_num(cfg, "a", 0.002);
  const double d = get_num(cfg, "d", 0.6);

  fon::Behavior behavior = fon::Behavior::Ordinary;
  double c = 0.0;
  if (cfg.contains("behavior")) {
    const json& b = cfg["behavior"];
    require_keys(b, {"type", "c"}, "behavior");
    const std::string type = get_str(b, "type", "ordinary");
    if (type == "ordinary") {
      behavior = fon::Behavior::Ordinary;
    } else if (type == "follower") {
      behavior = fon::Behavior::Follower;
      c = get_num(b, "c", 0.0);
    } else if (type == "contrarian") {
      behavior = fon::Behavior::Contrarian;
      c = get_num(b, "c", 0.0);
    } else {
      bad_field("behavior.type: expected ordinary|follower|contrarian");
    }
  }

  out.params.scheme = parse_scheme(get_str(cfg, "scheme", "local"));
  out.params.sigma_eps = get_num(cfg, "sigma_eps", 0.02);
  out.params.network.b = get_num(cfg, "b", 1.0);
  out.params.network.sigma_floor = get_num(cfg, "sigma_floor", 1e-9);
  out.params.max_steps = get_int(cfg, "max_steps", 5000);
  out.params.traders.assign(static_cast<std::size_t>(n),
                            fon::TraderSpec{a, d, behavior, c});

  out.recipe.p0 = get_num(cfg, "p0", 10.0);
  if (cfg.contains("pbar0")) {
    const json& p = cfg["pbar0"];
    require_keys(p, {"kind", "lo", "hi"}, "pbar0");
    const std::string kind = get_str(p, "kind", "grid");
    if (kind != "grid" && kind != "uniform") {
      bad_field("pbar0.kind: expected grid|uniform");
    }
    out.recipe.pbar_grid = kind == "grid";
    out.recipe.pbar_lo = get_num(p, "lo", 5.0);
    out.recipe.pbar_hi = get_num(p, "hi", 25.0);
  }
  if (cfg.contains("sigma0")) {
    const json& s = cfg["sigma0"];
    require_keys(s, {"lo", "hi"}, "sigma0");
    out.recipe.sigma_lo = get_num(s, "lo", 0.0);
    out.recipe.sigma_hi = get_num(s, "hi", 1.0);
  }

  if (cfg.contains("manipulators")) {
    if (!cfg["manipulators"].is_array()) {
      bad_field("manipulators: expected an array");
    }
    for (const json& m : cfg["manipulators"]) {
      require_keys(m, {"index", "pbar0"}, "manipulators[]");
      if (!m.contains("index")) bad_field("manipulators[].index: required");
      const int idx = get_int(m, "index", -1);
      if (idx < 0 || idx >= n) bad_field("manipulators[].index: out of range");
      out.params.traders[static_cast<std::size_t>(idx)] =
          fon::TraderSpec{a, 1.0, fon::Behavior::Manipulator, 0.0};
      if (m.contains("pbar0")) {
        out.recipe.center_overrides.emplace_back(idx, get_num(m, "pbar0", 0.0));
      }
    }
  }

  out.steps = get_int(cfg, "steps", 1000);
  out.stop_on_convergence = get_bool(cfg, "stop_on_convergence", false);
  out.convergence = parse_convergence(cfg);
  out.seed = static_cast<std::uint64_t>(get_num(cfg, "seed", 1));
  fon::finalize_market_params(out.params);
  return out;
}

fon::ExperimentGrid parse_sweep(const json& cfg) {
  require_keys(cfg,
               {"mode", "scheme", "metric", "d_values", "n_values", "b_values",
                "runs", "a", "sigma_eps", "p0", "pbar0", "sigma0",
                "sigma_floor", "max_steps", "convergence", "seed"},
               "sweep config");
  fon::ExperimentGrid grid;
  grid.scheme = parse_scheme(get_str(cfg, "scheme", "local"));
  const std::string metric = get_str(cfg, "metric", "group_count");
  if (metric == "group_count") {
    grid.metric = fon::Metric::GroupCount;
  } else if (metric == "steps_to_consensus") {
    grid.metric = fon::Metric::StepsToConsensus;
  } else {
    bad_field("metric: expected group_count|steps_to_consensus");
  }

  if (!cfg.contains("d_values") || !cfg["d_values"].is_array() ||
      cfg["d_values"].empty()) {
    bad_field("d_values: expected a non-empty array");
  }
  for (const json& v : cfg["d_values"]) {
    if (!v.is_number()) bad_field("d_values: expected numbers");
    grid.d_values.push_back(v.get<double>());
  }
  if (!cfg.contains("n_values") || !cfg["n_values"].is_array() ||
      cfg["n_values"].empty()) {
    bad_field("n_values: expected a non-empty array");
  }
  for (const json& v : cfg["n_values"]) {
    if (!v.is_number_integer()) bad_field("n_values: expected integers");
    grid.n_values.push_back(v.get<int>());
  }
  if (!cfg.contains("b_values") || !cfg["b_values"].is_array() ||
      cfg["b_values"].empty()) {
    bad_field("b_values: expected a non-empty array");
  }
  for (const json& v : cfg["b_values"]) {
    if (!v.is_number()) bad_field("b_values: expected numbers");
    grid.b_values.push_back(v.get<double>());
  }

  grid.runs_per_cell = get_int(cfg, "runs", 100);
  grid.a = get_num(cfg, "a", 0.002);
  grid.sigma_eps = get_num(cfg, "sigma_eps", 0.02);
  grid.p0 = get_num(cfg, "p0", 10.0);
  if (cfg.contains("pbar0")) {
    require_keys(cfg["pbar0"], {"lo", "hi"}, "pbar0");
    grid.pbar_lo = get_num(cfg["pbar0"], "lo", 5.0);
    grid.pbar_hi = get_num(cfg["pbar0"], "hi", 25.0);
  }
  if (cfg.contains("sigma0")) {
    require_keys(cfg["sigma0"], {"lo", "hi"}, "sigma0");
    grid.sigma0_lo = get_num(cfg["sigma0"], "lo", 0.0);
    grid.sigma0_hi = get_num(cfg["sigma0"], "hi", 1.0);
  }
  grid.sigma_floor = get_num(cfg, "sigma_floor", 1e-9);
  grid.max_steps = get_int(cfg, "max_steps", 5000);
  grid.convergence = parse_convergence(cfg);
  grid.base_seed = static_cast<std::uint64_t>(get_num(cfg, "seed", 1));
  for (double d : grid.d_values) {
    if (d < 0.0 || d > 1.0) bad_field("d_values: entries must be in [0,1]");
  }
  for (int n : grid.n_values) {
    if (n < 1) bad_field("n_values: entries must be >= 1");
  }
  for (double b : grid.b_values) {
    if (!(b > 0.0)) bad_field("b_values: entries must be > 0");
  }
  return grid;
}

struct EstimateConfig {
  std::string input;
  double lambda = 0.999;
  Eigen::Vector2d v0{0.5, 0.1};
  Eigen::Matrix2d P0 = Eigen::Matrix2d::Identity() * 10.0;
  int burn_in = 0;
  fon::SignalParams signal;
};

EstimateConfig parse_estimate(const json& cfg) {
  require_keys(
      cfg, {"mode", "input", "lambda", "v0", "P0_diag", "burn_in", "signal"},
      "estimate config");
  EstimateConfig out;
  out.input = get_str(cfg, "input", "");
  out.lambda = get_num(cfg, "lambda", 0.999);
  if (!(out.lambda > 0.0 && out.lambda <= 1.0)) {
    bad_field("lambda: must be in (0, 1]");
  }
  const auto pair_of = [&](const char* key, double& first, double& second) {
    const json& v = cfg[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
        !v[1].is_number()) {
      bad_field(std::string(key) + ": expected [number, number]");
    }
    first = v[0].get<double>();
    second = v[1].get<double>();
  };
  if (cfg.contains("v0")) pair_of("v0", out.v0[0], out.v0[1]);
  if (cfg.contains("P0_diag")) {
    double p00 = 0, p11 = 0;
    pair_of("P0_diag", p00, p11);
    if (!(p00 > 0.0 && p11 > 0.0)) bad_field("P0_diag: entries must be > 0");
    out.P0 = Eigen::Vector2d(p00, p11).asDiagonal();
  }
  out.burn_in = get_int(cfg, "burn_in", 0);
  if (out.burn_in < 0) bad_field("burn_in: must be >= 0");
  if (cfg.contains("signal")) {
    const json& s = cfg["signal"];
    require_keys(s, {"tau", "delta", "pb", "nb", "p", "n"}, "signal");
    out.signal.tau = get_int(s, "tau", 5);
    if (out.signal.tau < 1) bad_field("signal.tau: must be >= 1");
    out.signal.delta = get_num(s, "delta", 0.25);
    if (!(out.signal.delta > 0.0 && out.signal.delta < 1.0)) {
      bad_field("signal.delta: must be in (0, 1)");
    }
    const auto ramp = [&](const char* key, fon::Ramp& r) {
      if (!s.contains(key)) return;
      const json& v = s[key];
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
          !v[1].is_number()) {
        bad_field(std::string("signal.") + key +
                  ": expected [zero_at, one_at]");
      }
      const double z = v[0].get<double>();
      const double o = v[1].get<double>();
      if (z == o) {
        bad_field(std::string("signal.") + key + ": knots must differ");
      }
      r = fon::Ramp{z, o};
    };
    ramp("pb", out.signal.pb);
    ramp("nb", out.signal.nb);
    ramp("p", out.signal.p);
    ramp("n", out.signal.n);
  }
  return out;
}

json preset_config(const std::string& name) {
  const json grid_5_25 = {{"kind", "grid"}, {"lo", 5.0}, {"hi", 25.0}};
  if (name == "example1") {
    return {{"mode", "simulate"}, {"scheme", "local"},   {"n", 60},
            {"a", 0.002},         {"d", 0.6},            {"b", 1.0},
            {"sigma_eps", 0.02},  {"p0", 10.0},          {"pbar0", grid_5_25},
            {"sigma0", {{"lo", 0.0}, {"hi", 1.0}}},      {"steps", 1000}};
  }
  if (name == "example2" || name == "example3") {
    return {{"mode", "simulate"},
            {"scheme", name == "example2" ? "global" : "realprice"},
            {"n", 60},
            {"a", 0.005},
            {"d", 0.95},
            {"b", 0.1},
            {"sigma_eps", 0.02},
            {"p0", 10.0},
            {"pbar0", grid_5_25},
            {"sigma0", {{"lo", 0.0}, {"hi", 5.0}}},
            {"steps", 1000}};
  }
  if (name == "example4") {
    return {{"mode", "simulate"}, {"scheme", "local"},   {"n", 60},
            {"a", 0.002},         {"d", 0.6},            {"b", 1.0},
            {"sigma_eps", 0.02},  {"p0", 10.0},          {"pbar0", grid_5_25},
            {"sigma0", {{"lo", 0.0}, {"hi", 1.0}}},      {"steps", 1000},
            {"behavior", {{"type", "follower"}, {"c", 0.0001}}}};
  }
  if (name == "example5") {
    return {{"mode", "simulate"}, {"scheme", "local"},   {"n", 60},
            {"a", 0.002},         {"d", 0.6},            {"b", 1.0},
            {"sigma_eps", 0.02},  {"p0", 10.0},          {"pbar0", grid_5_25},
            {"sigma0", {{"lo", 0.0}, {"hi", 1.0}}},      {"steps", 1000},
            {"behavior", {{"type", "contrarian"}, {"c", 0.01}}}};
  }
  if (name == "example6") {
    return {{"mode", "simulate"}, {"scheme", "realprice"}, {"n", 60},
            {"a", 0.002},         {"d", 0.95},             {"b", 0.1},
            {"sigma_eps", 0.02},  {"p0", 10.0},            {"pbar0", grid_5_25},
            {"sigma0", {{"lo", 0.0}, {"hi", 5.0}}},        {"steps", 2000},
            {"manipulators", json::array({{{"index", 39}}, {{"index", 49}}})}};
  }
  if (name == "table1") {
    return {{"mode", "sweep"},
            {"scheme", "local"},
            {"metric", "group_count"},
            {"d_values", {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}},
            {"n_values", {20, 40, 60, 80, 100}},
            {"b_values", {1.0}},
            {"runs", 100},
            {"a", 0.002},
            {"sigma_eps", 0.02},
            {"sigma0", {{"lo", 0.0}, {"hi", 1.0}}}};
  }
  if (name == "table2" || name == "table3") {
    return {{"mode", "sweep"},
            {"scheme", name == "table2" ? "global" : "realprice"},
            {"metric", "steps_to_consensus"},
            {"d_values", {0.85, 0.9, 0.95, 0.99}},
            {"n_values", {60}},
            {"b_values", {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45}},
            {"runs", 100},
            {"a", 0.005},
            {"sigma_eps", 0.02},
            {"sigma0", {{"lo", 0.0}, {"hi", 5.0}}}};
  }
  bad_field("unknown preset '" + name + "'");
}

void apply_sets(json& cfg, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) bad_field("--set expects key=value");
    std::string path = "/" + kv.substr(0, eq);
    for (auto& ch : path) {
      if (ch == '.') ch = '/';
    }
    json value;
    try {
      value = json::parse(kv.substr(eq + 1));
    } catch (const json::parse_error&) {
      value = kv.substr(eq + 1);  // plain string
    }
    cfg[json::json_pointer(path)] = value;
  }
}

json load_config(const std::optional<std::string>& config_path,
                 const std::optional<std::string>& preset,
                 const std::vector<std::string>& sets,
                 const std::optional<std::uint64_t>& seed,
                 const std::optional<int>& steps, bool allow_empty) {
  json cfg = json::object();
  if (config_path && preset) bad_field("give either --config or --preset");
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) bad_field("cannot open config: " + *config_path);
    try {
      cfg = json::parse(in);
    } catch (const json::parse_error& e) {
      bad_field("config parse error: " + std::string(e.what()));
    }
  } else if (preset) {
    cfg = preset_config(*preset);
  } else if (!allow_empty) {
    bad_field("need --config or --preset");
  }
  apply_sets(cfg, sets);
  if (seed) cfg["seed"] = *seed;
  if (steps) cfg["steps"] = *steps;
  return cfg;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string sidecar_path(const std::string& out_path) {
  std::filesystem::path p(out_path);
  p.replace_extension(".json");
  return p.string();
}

std::string trace_csv(const fon::SimulationTrace& trace) {
  std::string s;
  const int n = trace.states.front().n();
  s += "t,p";
  for (int i = 1; i <= n; ++i) s += ",pbar_" + std::to_string(i);
  for (int i = 1; i <= n; ++i) s += ",sigma_" + std::to_string(i);
  s += "\n";
  for (std::size_t t = 0; t < trace.states.size(); ++t) {
    s += std::to_string(trace.states[t].t);
    s += ",";
    s += fon::format_double(std::exp(trace.log_prices[t]));
    for (int i = 0; i < n; ++i) {
      s += ",";
      s += fon::format_double(trace.states[t].centers[i]);
    }
    for (int i = 0; i < n; ++i) {
      s += ",";
      s += fon::format_double(trace.states[t].sdvs[i]);
    }
    s += "\n";
  }
  return s;
}

int cmd_simulate(const json& cfg, const std::string& out_path) {
  const SimulateConfig sim = parse_simulate(cfg);
  fon::Rng rng(sim.seed);
  const auto initial = fon::make_initial_state(
      sim.recipe, static_cast<int>(sim.params.traders.size()),
      sim.params.network.sigma_floor, rng);
  fon::RunOptions opts;
  opts.stop_on_convergence = sim.stop_on_convergence;
  opts.convergence = sim.convergence;
  auto trace = fon::run_simulation(sim.params, initial, sim.steps, rng, opts);
  trace.seed = sim.seed;

  write_file(out_path, trace_csv(trace));

  json side;
  side["seed"] = sim.seed;
  side["steps"] = trace.steps();
  side["scheme"] = fon::to_string(sim.params.scheme);
  side["diverged"] = trace.diverged;
  side["converged"] = trace.convergence.converged;
  if (trace.convergence.converged) {
    side["t_n"] = trace.convergence.t_n;
    side["groups"] = trace.convergence.partition.size();
    side["group_centers"] = trace.convergence.partition.group_centers;
    side["group_sdvs"] = trace.convergence.partition.group_sdvs;
    if (sim.params.scheme != fon::MarketScheme::RealPrice) {
      const auto limit = fon::predicted_limit_log_price(
          trace.convergence, trace.states.back(), sim.params.traders,
          sim.params.scheme);
      side["predicted_limit"] = {{"log_price", limit.log_price},
                                 {"price", std::exp(limit.log_price)},
                                 {"stable", limit.stable}};
    }
  }
  const bool has_manipulator =
      std::any_of(sim.params.traders.begin(), sim.params.traders.end(),
                  [](const fon::TraderSpec& t) {
                    return t.behavior == fon::Behavior::Manipulator;
                  });
  if (has_manipulator) {
    side["manipulator_consensus_target"] =
        fon::manipulator_consensus_target(sim.params.traders, initial.network);
  }
  write_file(sidecar_path(out_path), side.dump(2) + "\n");
  std::cout << "trace: " << out_path << " (" << trace.steps() << " steps)\n"
            << "sidecar: " << sidecar_path(out_path) << "\n";
  return 0;
}

int cmd_sweep(const json& cfg, const std::string& out_path) {
  const fon::ExperimentGrid grid = parse_sweep(cfg);
  const auto results = fon::run_grid(grid);
  std::ostringstream csv;
  fon::write_stats_csv(csv, grid, results);
  write_file(out_path, csv.str());
  std::ostringstream js;
  fon::write_stats_json(js, grid, results);
  write_file(sidecar_path(out_path), js.str());
  std::cout << "sweep: " << out_path << " (" << results.size() << " cells)\n";
  return 0;
}

std::string signal_name(const fon::SignalResult& r) {
  if (r.conflict) return "conflict";
  switch (r.signal) {
    case fon::Signal::Buy:
      return "buy";
    case fon::Signal::Sell:
      return "sell";
    case fon::Signal::None:
      return "none";
  }
  return "none";
}

int run_estimate_pipeline(const json& cfg, const std::string& out_path,
                          const std::optional<std::string>& input_flag,
                          bool signals_only) {
  EstimateConfig est_cfg = parse_estimate(cfg);
  if (input_flag) est_cfg.input = *input_flag;
  if (est_cfg.input.empty()) bad_field("input: required");
  const auto series = fon::load_price_csv(est_cfg.input);
  if (series.size() < 2) bad_field("input: need at least two rows");
  const auto estimates =
      fon::estimate_series(series, est_cfg.lambda, est_cfg.v0, est_cfg.P0);

  std::vector<fon::SignalResult> signals(estimates.size());
  for (int t = est_cfg.signal.tau; t < static_cast<int>(estimates.size());
       ++t) {
    signals[static_cast<std::size_t>(t)] =
        fon::trading_signal(series, estimates, est_cfg.signal, t);
  }

  std::string csv = "date,price,pbar_hat,sigma_hat,gap_flag,signal\n";
  int gaps = 0, buys = 0, sells = 0, conflicts = 0;
  for (std::size_t t = 0; t < estimates.size(); ++t) {
    const auto& e = estimates[t];
    const std::string sig = signal_name(signals[t]);
    gaps += e.gap ? 1 : 0;
    buys += signals[t].signal == fon::Signal::Buy ? 1 : 0;
    sells += signals[t].signal == fon::Signal::Sell ? 1 : 0;
    conflicts += signals[t].conflict ? 1 : 0;
    if (signals_only && sig == "none") continue;
    csv += series[t].date;
    csv += ",";
    csv += fon::format_double(series[t].price);
    csv += ",";
    csv += e.gap ? "nan" : fon::format_double(e.pbar_hat);
    csv += ",";
    csv += e.gap ? "nan" : fon::format_double(e.sigma_hat);
    csv += ",";
    csv += e.gap ? "1" : "0";
    csv += ",";
    csv += sig;
    csv += "\n";
  }
  write_file(out_path, csv);

  json side;
  side["input"] = est_cfg.input;
  side["rows"] = estimates.size();
  side["lambda"] = est_cfg.lambda;
  side["burn_in"] = est_cfg.burn_in;
  side["gaps"] = gaps;
  side["word_of_mouth_proportion"] =
      fon::word_of_mouth_proportion(series, estimates, est_cfg.burn_in);
  side["signals"] = {{"buy", buys}, {"sell", sells}, {"conflict", conflicts}};
  write_file(sidecar_path(out_path), side.dump(2) + "\n");
  std::cout << (signals_only ? "signals: " : "estimates: ") << out_path
            << "\nsummary: " << sidecar_path(out_path) << "\n";
  return 0;
}

int cmd_verify(std::optional<double> tol, std::uint64_t seed) {
  fon::VerifyOptions opts;
  opts.tol_override = tol;
  opts.seed = seed;
  const auto results = fon::run_verify(opts);
  bool all_pass = true;
  for (const auto& r : results) {
    std::printf("%-26s [%-22s] %s  %s\n", r.name.c_str(), r.covers.c_str(),
                r.pass ? "PASS" : "FAIL", r.detail.c_str());
    all_pass = all_pass && r.pass;
  }
  std::printf("%s (%zu checks)\n", all_pass ? "ALL PASS" : "FAILURES",
              results.size());
  return all_pass ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy-opinion-network stock market simulator and estimator"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::optional<std::string> input;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::vector<std::string> sets;
  std::string out_path;
  std::optional<double> verify_tol;
  std::uint64_t verify_seed = 20160101;

  const auto add_common = [&](CLI::App* sub, const char* default_out) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--preset", preset,
                    "named preset (example1..example6, table1..table3)");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--set", sets,
                    "override a config field, e.g. --set pbar0.lo=4.5");
    sub->add_option("--out", out_path, "output path")->default_val(default_out);
  };

  CLI::App* simulate = app.add_subcommand(
      "simulate", "run one market simulation and write the trace");
  add_common(simulate, "trace.csv");
  simulate->add_option("--steps", steps, "override the step count");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "run a Monte Carlo parameter grid and write the stats table");
  add_common(sweep, "sweep.csv");

  CLI::App* estimate = app.add_subcommand(
      "estimate", "run the recursive estimation pipeline over a price CSV");
  add_common(estimate, "estimates.csv");
  estimate->add_option("--input", input, "price CSV (date,adj_close)");

  CLI::App* signal = app.add_subcommand(
      "signal", "like estimate, but write only the firing signal rows");
  add_common(signal, "signals.csv");
  signal->add_option("--input", input, "price CSV (date,adj_close)");

  CLI::App* verify = app.add_subcommand(
      "verify", "run the built-in invariant and oracle suites");
  verify->add_option("--tol", verify_tol, "override numeric tolerances");
  verify->add_option("--seed", verify_seed, "suite seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return cmd_simulate(
          load_config(config_path, preset, sets, seed, steps, false), out_path);
    }
    if (sweep->parsed()) {
      return cmd_sweep(
          load_config(config_path, preset, sets, seed, steps, false), out_path);
    }
    if (estimate->parsed() || signal->parsed()) {
      const json cfg =
          load_config(config_path, preset, sets, seed, steps, true);
      return run_estimate_pipeline(cfg, out_path, input, signal->parsed());
    }
    if (verify->parsed()) return cmd_verify(verify_tol, verify_seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
