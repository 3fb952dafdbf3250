#include "cachegeo/experiments.hpp"

#include <boost/property_tree/ini_parser.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <json.hpp>
#include <sstream>

#include "cachegeo/analytics.hpp"
#include "cachegeo/optimizer.hpp"

#ifndef CACHEGEO_VERSION
#define CACHEGEO_VERSION "0.0.0"
#endif

namespace cachegeo::experiments {
namespace {

const std::vector<std::string> kKeys = {
    "network.helper_density", "network.user_density", "network.tx_power",     "network.noise_power",
    "network.snr_db",         "network.pathloss_exp", "network.fading_desired", "network.fading_interf",
    "library.count",          "library.zipf",         "library.rate_mode",    "library.rate",
    "library.rate_seed",      "policy.memory",        "policy.source",        "policy.probs",
    "interference.c_mode",    "interference.c",       "interference.c_max",   "interference.load_mode",
    "simulate.mode",          "cdf.p",                "cdf.points",           "cdf.xi_max",
    "sweep.variable",         "sweep.values",         "run.trials",           "run.seed",
    "run.output",             "run.figure",           "run.radius",           "run.threads",
    "figure.procedure",       "figure.grid_step",
};

// Keys whose values may be swept.
bool sweepable(const std::string& key) {
  static const std::vector<std::string> excluded = {"sweep.variable", "sweep.values", "run.output", "run.figure",
                                                    "figure.procedure"};
  return std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end() &&
         std::find(excluded.begin(), excluded.end(), key) == excluded.end();
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string item;
  while (is >> item) out.push_back(item);
  return out;
}

double to_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a finite number, got '" + text + "'");
}

template <class T>
T to_integer(const std::string& key, const std::string& text) {
  const double v = to_number(key, text);
  if (v != std::floor(v) || v < 0.0 || v > 9.0e15) throw ConfigError(key + ": expected a nonnegative integer");
  return static_cast<T>(v);
}

std::string format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string join(const std::vector<double>& v, char sep = ';') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format(v[i]);
  }
  return out;
}

Config overlay(Config base, const Config& over) {
  for (const auto& [section, body] : over) {
    if (body.empty()) {
      base.put(section, body.data());
      continue;
    }
    for (const auto& [key, value] : body) base.put(Config::path_type(section + "." + key, '.'), value.data());
  }
  return base;
}

// Configuration with sweep point `values` assigned to `variables`. A single
// vector-valued variable takes all components.
Config with_point(const Config& config, const std::vector<std::string>& variables,
                  const std::vector<std::string>& values) {
  Config out = config;
  if (variables.size() == 1 && variables[0] == "policy.probs") {
    std::string joined;
    for (std::size_t i = 0; i < values.size(); ++i) joined += (i ? "," : "") + values[i];
    out.put("policy.probs", joined);
    return out;
  }
  for (std::size_t k = 0; k < variables.size(); ++k) out.put(variables[k], values[k]);
  return out;
}

struct SweepPoint {
  std::string label;  // value as written in the config, ':' joined
  Config config;
};

std::vector<SweepPoint> sweep_points(const Config& config) {
  const std::string variable = config.get<std::string>("sweep.variable", "");
  const std::string values = config.get<std::string>("sweep.values", "");
  if (variable.empty()) {
    if (!values.empty()) throw ConfigError("sweep.values given without sweep.variable");
    return {{"", config}};
  }
  const auto variables = split_ws(variable);
  for (const auto& v : variables) {
    if (!sweepable(v)) throw ConfigError("sweep.variable: '" + v + "' is not a parameter that can be swept");
  }
  const auto points = split(values, ',');
  if (points.empty()) throw ConfigError("sweep.values: empty grid");
  std::vector<SweepPoint> out;
  for (const auto& point : points) {
    const auto parts = split(point, ':');
    const bool vector_valued = variables.size() == 1 && variables[0] == "policy.probs";
    if (!vector_valued && parts.size() != variables.size()) {
      throw ConfigError("sweep.values: point '" + point + "' does not match " + std::to_string(variables.size()) +
                        " variable(s)");
    }
    out.push_back({point, with_point(config, variables, parts)});
  }
  return out;
}

std::string sweep_variable(const Config& config) { return trim(config.get<std::string>("sweep.variable", "")); }

// ---------------------------------------------------------------------------
// Shared pieces of the scenarios
// ---------------------------------------------------------------------------

CachingPolicy explicit_policy(const Settings& s) {
  if (s.probs.size() != s.count) {
    throw ConfigError("policy.probs: expected " + std::to_string(s.count) + " values, got " +
                      std::to_string(s.probs.size()));
  }
  CachingPolicy policy{s.probs, s.memory};
  if (auto err = validate_policy(policy)) throw ConfigError("policy.probs: " + *err);
  return policy;
}

void require_users(const Settings& s) {
  if (!(s.network.user_density > 0.0)) {
    throw ConfigError("network.user_density must be positive for interference experiments");
  }
}

std::vector<CachingPolicy> reference_policies(const Settings& s, const ContentLibrary& lib) {
  const CachingPolicy uc = baseline_policy(Baseline::uniform, lib.count(), s.memory);
  const CachingPolicy mpc = baseline_policy(Baseline::most_popular, lib.count(), s.memory);
  CachingPolicy blend = uc;
  for (std::size_t i = 0; i < blend.probs.size(); ++i) blend.probs[i] = 0.5 * (uc.probs[i] + mpc.probs[i]);
  std::vector<CachingPolicy> refs{uc, mpc, blend};
  const double c_load = load_based_c(s.memory, s.network.user_density, s.network.helper_density);
  refs.push_back(optimize_interference(lib, interference_constants(lib, s.network.pathloss_exp, c_load), s.memory).policy);
  return refs;
}

double rayleigh_bound(const ContentLibrary& lib, double alpha, double c, const CachingPolicy& p) {
  return rayleigh_lower_bound(lib, interference_constants(lib, alpha, c), p);
}

// Smallest c whose bound stays below the Monte Carlo estimates of the
// reference policies.
double search_c(const Settings& s, const ContentLibrary& lib, const std::vector<CachingPolicy>& refs,
                const std::vector<double>& values) {
  const double alpha = s.network.pathloss_exp;
  return find_tight_c([&](double c, const CachingPolicy& p) { return rayleigh_bound(lib, alpha, c, p); }, refs,
                      values, s.c_max);
}

std::vector<double> estimate_all(const Settings& s, const ContentLibrary& lib, const std::vector<CachingPolicy>& ps,
                                 LoadMode mode, std::vector<Estimate>* out = nullptr) {
  std::vector<double> values;
  for (const auto& p : ps) {
    const Estimate e = simulate_interference_limited(lib, s.network, p, s.simulation(), mode);
    values.push_back(e.value);
    if (out) out->push_back(e);
  }
  return values;
}

double resolve_c(const Settings& s, const ContentLibrary& lib) {
  if (s.c_mode == "fixed") return s.c;
  require_users(s);
  if (s.c_mode == "load") return load_based_c(s.memory, s.network.user_density, s.network.helper_density);
  const auto refs = reference_policies(s, lib);
  return search_c(s, lib, refs, estimate_all(s, lib, refs, s.load_mode));
}

bool rayleigh_fading(const NetworkParams& n) { return n.fading_desired == 1.0 && n.fading_interf == 1.0; }

// Analytic lower bound matching the fading configuration.
double interference_bound(const ContentLibrary& lib, const NetworkParams& n, const CachingPolicy& p, double c) {
  if (rayleigh_fading(n)) return rayleigh_bound(lib, n.pathloss_exp, c, p);
  return nakagami_lower_bound(lib, n, p, c);
}

std::vector<std::string> input_header() {
  return {"helper_density", "user_density", "tx_power", "noise_power", "pathloss_exp", "fading_desired",
          "fading_interf",  "count",        "zipf",     "rate_mode",   "rate",         "memory"};
}

std::vector<std::string> input_row(const Settings& s) {
  const auto& n = s.network;
  return {format(n.helper_density), format(n.user_density),   format(n.tx_power),
          format(n.noise_power),    format(n.pathloss_exp),   format(n.fading_desired),
          format(n.fading_interf),  std::to_string(s.count),  format(s.gamma),
          s.rate_mode,              format(s.rate),           std::to_string(s.memory)};
}

// Runs `row_fn` for every sweep point; each call appends rows after the
// sweep columns and the input columns.
Table sweep_table(const Config& config, const std::vector<std::string>& header,
                  const std::function<std::vector<std::vector<std::string>>(const Settings&)>& row_fn) {
  Table table;
  table.header = {"sweep_index", "sweep_variable", "sweep_value"};
  for (const auto& h : input_header()) table.header.push_back(h);
  for (const auto& h : header) table.header.push_back(h);
  const std::string variable = sweep_variable(config);
  const auto points = sweep_points(config);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Settings s = resolve(points[k].config);
    for (auto& row : row_fn(s)) {
      std::vector<std::string> full{std::to_string(k), variable, points[k].label};
      for (auto& v : input_row(s)) full.push_back(std::move(v));
      for (auto& v : row) full.push_back(std::move(v));
      table.rows.push_back(std::move(full));
    }
  }
  return table;
}

std::vector<std::string> estimate_cells(const Estimate& e) { return {format(e.value), format(e.std_error)}; }

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

Table run_cdf(const Config& config) {
  return sweep_table(config, {"p", "xi", "cdf_analytic", "cdf_empirical", "abs_error"}, [](const Settings& s) {
    std::vector<std::vector<std::string>> rows;
    const double p = s.cdf_p;
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("cdf.p must lie in (0, 1]");
    if (s.cdf_points < 1) throw ConfigError("cdf.points must be >= 1");
    const double k = kappa(s.network) * p;
    const double xi_max =
        s.cdf_xi_max > 0.0 ? s.cdf_xi_max : std::pow(-std::log(1e-3) / k, 1.0 / s.network.delta());
    auto samples = sample_xi_min(s.network, p, s.trials, s.seed, s.radius);
    std::sort(samples.begin(), samples.end());
    for (std::size_t j = 1; j <= s.cdf_points; ++j) {
      const double xi = xi_max * static_cast<double>(j) / static_cast<double>(s.cdf_points);
      const double analytic = xi1_cdf(xi, p, s.network);
      const auto below = std::upper_bound(samples.begin(), samples.end(), xi) - samples.begin();
      const double empirical = static_cast<double>(below) / static_cast<double>(samples.size());
      rows.push_back({format(p), format(xi), format(analytic), format(empirical), format(std::abs(analytic - empirical))});
    }
    return rows;
  });
}

Table run_optimize_noise(const Config& config) {
  return sweep_table(config,
                     {"proposed", "mpc", "uc", "mc_proposed", "mc_proposed_se", "mc_mpc", "mc_mpc_se", "mc_uc",
                      "mc_uc_se", "omega", "iterations", "kkt_residual", "spread", "probs"},
                     [](const Settings& s) {
                       const ContentLibrary lib = s.library();
                       const SolveReport r = optimize_noise(lib, s.network, s.memory);
                       const CachingPolicy mpc = baseline_policy(Baseline::most_popular, lib.count(), s.memory);
                       const CachingPolicy uc = baseline_policy(Baseline::uniform, lib.count(), s.memory);
                       std::vector<std::string> row{format(r.objective), format(success_noise(lib, s.network, mpc)),
                                                    format(success_noise(lib, s.network, uc))};
                       std::uint64_t salt = 0;
                       for (const auto* p : {&r.policy, &mpc, &uc}) {
                         for (auto& c : estimate_cells(simulate_noise_limited(lib, s.network, *p, s.simulation(salt++)))) {
                           row.push_back(std::move(c));
                         }
                       }
                       row.insert(row.end(), {format(r.omega), std::to_string(r.iterations), format(r.kkt_residual),
                                              format(policy_spread(r.policy)), join(r.policy.probs)});
                       return std::vector<std::vector<std::string>>{row};
                     });
}

Table run_optimize_sir(const Config& config) {
  return sweep_table(config,
                     {"c_mode", "c", "proposed_bound", "mpc_bound", "uc_bound", "mc_proposed", "mc_proposed_se",
                      "load_mode", "omega", "iterations", "kkt_residual", "spread", "probs"},
                     [](const Settings& s) {
                       const ContentLibrary lib = s.library();
                       const double c = resolve_c(s, lib);
                       const InterferenceConstants ic = interference_constants(lib, s.network.pathloss_exp, c);
                       const SolveReport r = optimize_interference(lib, ic, s.memory);
                       const CachingPolicy mpc = baseline_policy(Baseline::most_popular, lib.count(), s.memory);
                       const CachingPolicy uc = baseline_policy(Baseline::uniform, lib.count(), s.memory);
                       std::vector<std::string> row{s.c_mode, format(c), format(r.objective),
                                                    format(rayleigh_lower_bound(lib, ic, mpc)),
                                                    format(rayleigh_lower_bound(lib, ic, uc))};
                       if (s.network.user_density > 0.0) {
                         for (auto& v : estimate_cells(simulate_interference_limited(lib, s.network, r.policy,
                                                                                     s.simulation(), s.load_mode))) {
                           row.push_back(std::move(v));
                         }
                       } else {
                         row.insert(row.end(), {"", ""});
                       }
                       row.insert(row.end(), {std::string(to_string(s.load_mode)), format(r.omega),
                                              std::to_string(r.iterations), format(r.kkt_residual),
                                              format(policy_spread(r.policy)), join(r.policy.probs)});
                       return std::vector<std::vector<std::string>>{row};
                     });
}

CachingPolicy simulate_policy(const Settings& s, const ContentLibrary& lib, double c) {
  if (s.policy_source == "explicit") return explicit_policy(s);
  if (s.policy_source == "mpc") return baseline_policy(Baseline::most_popular, lib.count(), s.memory);
  if (s.policy_source == "uc") return baseline_policy(Baseline::uniform, lib.count(), s.memory);
  if (s.sim_mode == "noise") return optimize_noise(lib, s.network, s.memory).policy;
  return optimize_interference(lib, interference_constants(lib, s.network.pathloss_exp, c), s.memory).policy;
}

Table run_simulate(const Config& config) {
  const Settings first = resolve(sweep_points(config).front().config);
  if (first.sim_mode == "noise") {
    return sweep_table(config, {"policy_source", "analytic", "mc", "mc_se", "probs"}, [](const Settings& s) {
      const ContentLibrary lib = s.library();
      const CachingPolicy p = simulate_policy(s, lib, s.c);
      std::vector<std::string> row{s.policy_source, format(success_noise(lib, s.network, p))};
      for (auto& v : estimate_cells(simulate_noise_limited(lib, s.network, p, s.simulation()))) row.push_back(v);
      row.push_back(join(p.probs));
      return std::vector<std::vector<std::string>>{row};
    });
  }
  return sweep_table(config,
                     {"policy_source", "c_mode", "c", "bound", "mc_instantaneous", "mc_instantaneous_se",
                      "mc_mean_approx", "mc_mean_approx_se", "mc_long_term", "mc_long_term_se",
                      "mean_load_instantaneous", "mean_load_long_term", "window_radius", "probs"},
                     [](const Settings& s) {
                       require_users(s);
                       const ContentLibrary lib = s.library();
                       const double c = resolve_c(s, lib);
                       const CachingPolicy p = simulate_policy(s, lib, c);
                       const InterferenceReport rep = simulate_interference(lib, s.network, p, s.simulation());
                       std::vector<std::string> row{s.policy_source, s.c_mode, format(c),
                                                    format(interference_bound(lib, s.network, p, c))};
                       for (const auto* e : {&rep.instantaneous, &rep.mean_approx, &rep.long_term}) {
                         for (auto& v : estimate_cells(*e)) row.push_back(v);
                       }
                       row.insert(row.end(), {join(rep.mean_load_instantaneous), join(rep.mean_load_long_term),
                                              format(rep.radius), join(p.probs)});
                       return std::vector<std::vector<std::string>>{row};
                     });
}

// Exhaustive search of the Monte Carlo success probability against the
// bound-optimal policy with a searched c.
Table run_brute_force_sir(const Config& config) {
  return sweep_table(
      config,
      {"load_mode", "grid_step", "optimal_mc", "optimal_mc_se", "optimal_probs", "c", "suboptimal_mc",
       "suboptimal_mc_se", "suboptimal_bound", "suboptimal_probs", "mpc_mc", "mpc_mc_se", "uc_mc", "uc_mc_se"},
      [&config](const Settings& s) {
        require_users(s);
        const ContentLibrary lib = s.library();
        const double step = config.get<double>("figure.grid_step", 0.1);
        std::vector<CachingPolicy> grid;
        std::vector<Estimate> grid_est;
        const auto best = brute_force_policy(
            [&](const CachingPolicy& p) {
              grid.push_back(p);
              grid_est.push_back(simulate_interference_limited(lib, s.network, p, s.simulation(), s.load_mode));
              return grid_est.back().value;
            },
            lib.count(), s.memory, step);
        std::size_t best_index = 0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
          if (grid[k].probs == best.policy.probs) {
            best_index = k;
            break;
          }
        }
        std::vector<double> values;
        for (const auto& e : grid_est) values.push_back(e.value);
        const double c = search_c(s, lib, grid, values);
        const CachingPolicy sub =
            optimize_interference(lib, interference_constants(lib, s.network.pathloss_exp, c), s.memory).policy;
        const Estimate sub_est = simulate_interference_limited(lib, s.network, sub, s.simulation(), s.load_mode);
        std::vector<std::string> row{std::string(to_string(s.load_mode)), format(step)};
        for (auto& v : estimate_cells(grid_est[best_index])) row.push_back(v);
        row.push_back(join(best.policy.probs));
        row.push_back(format(c));
        for (auto& v : estimate_cells(sub_est)) row.push_back(v);
        row.push_back(format(rayleigh_bound(lib, s.network.pathloss_exp, c, sub)));
        row.push_back(join(sub.probs));
        for (Baseline b : {Baseline::most_popular, Baseline::uniform}) {
          const CachingPolicy p = baseline_policy(b, lib.count(), s.memory);
          for (auto& v : estimate_cells(simulate_interference_limited(lib, s.network, p, s.simulation(), s.load_mode))) {
            row.push_back(v);
          }
        }
        return std::vector<std::vector<std::string>>{row};
      });
}

// Proposed policies with searched and load-based c against MPC and UC,
// all scored by Monte Carlo.
Table run_compare_sir(const Config& config) {
  return sweep_table(config,
                     {"load_mode", "c_search", "c_load", "searched_mc", "searched_mc_se", "load_mc", "load_mc_se",
                      "mpc_mc", "mpc_mc_se", "uc_mc", "uc_mc_se", "searched_bound", "mpc_bound", "uc_bound",
                      "searched_probs", "load_probs"},
                     [](const Settings& s) {
                       require_users(s);
                       const ContentLibrary lib = s.library();
                       const double alpha = s.network.pathloss_exp;
                       const auto refs = reference_policies(s, lib);
                       std::vector<Estimate> ref_est;
                       const auto values = estimate_all(s, lib, refs, s.load_mode, &ref_est);
                       const double c_search = search_c(s, lib, refs, values);
                       const double c_load = load_based_c(s.memory, s.network.user_density, s.network.helper_density);
                       const CachingPolicy searched =
                           optimize_interference(lib, interference_constants(lib, alpha, c_search), s.memory).policy;
                       const CachingPolicy& loaded = refs[3];
                       const CachingPolicy& uc = refs[0];
                       const CachingPolicy& mpc = refs[1];
                       std::vector<std::string> row{std::string(to_string(s.load_mode)), format(c_search), format(c_load)};
                       for (auto& v : estimate_cells(simulate_interference_limited(lib, s.network, searched,
                                                                                   s.simulation(), s.load_mode))) {
                         row.push_back(v);
                       }
                       for (const std::size_t k : {std::size_t{3}, std::size_t{1}, std::size_t{0}}) {
                         for (auto& v : estimate_cells(ref_est[k])) row.push_back(v);
                       }
                       const InterferenceConstants ic = interference_constants(lib, alpha, c_search);
                       row.insert(row.end(), {format(rayleigh_lower_bound(lib, ic, searched)),
                                              format(rayleigh_lower_bound(lib, ic, mpc)),
                                              format(rayleigh_lower_bound(lib, ic, uc)), join(searched.probs),
                                              join(loaded.probs)});
                       return std::vector<std::vector<std::string>>{row};
                     });
}

Table run_figure(const Config& config) {
  const std::string id = trim(config.get<std::string>("run.figure", ""));
  if (id.empty()) throw ConfigError("figure scenario requires a figure id (--figure or run.figure)");
  const FigureInfo& info = find_figure(id);
  Config merged = overlay(parse_config(info.config), config);
  const std::string procedure = merged.get<std::string>("figure.procedure", "");
  if (procedure == "cdf") return run_cdf(merged);
  if (procedure == "optimize-noise") return run_optimize_noise(merged);
  if (procedure == "optimize-sir") return run_optimize_sir(merged);
  if (procedure == "simulate") return run_simulate(merged);
  if (procedure == "brute-force-sir") return run_brute_force_sir(merged);
  if (procedure == "compare-sir") return run_compare_sir(merged);
  throw ConfigError("figure.procedure: unknown procedure '" + procedure + "'");
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

nlohmann::json config_json(const Config& config) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [section, body] : config) {
    if (body.empty()) {
      j[section] = body.data();
      continue;
    }
    for (const auto& [key, value] : body) j[section][key] = value.data();
  }
  return j;
}

}  // namespace

Scenario parse_scenario(std::string_view name) {
  if (name == "cdf") return Scenario::cdf;
  if (name == "optimize-noise") return Scenario::optimize_noise;
  if (name == "optimize-sir") return Scenario::optimize_sir;
  if (name == "simulate") return Scenario::simulate;
  if (name == "figure") return Scenario::figure;
  if (name == "list-figures" || name == "list_figures") return Scenario::list_figures;
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::cdf: return "cdf";
    case Scenario::optimize_noise: return "optimize-noise";
    case Scenario::optimize_sir: return "optimize-sir";
    case Scenario::simulate: return "simulate";
    case Scenario::figure: return "figure";
    case Scenario::list_figures: return "list-figures";
  }
  return "unknown";
}

ContentLibrary Settings::library() const {
  std::vector<double> rates =
      rate_mode == "constant" ? constant_rates(rate, count) : uniform_rates(rate, count, rate_seed);
  try {
    return make_library(zipf_popularity(count, gamma), std::move(rates));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("library: ") + e.what());
  }
}

SimulationOptions Settings::simulation(std::uint64_t salt) const {
  SimulationOptions o;
  o.trials = trials;
  o.seed = seed + salt;
  o.radius = radius;
  o.threads = threads;
  return o;
}

const std::vector<std::string>& known_keys() { return kKeys; }

Settings resolve(const Config& config) {
  std::map<std::string, std::string> values;
  for (const auto& [section, body] : config) {
    if (body.empty() && !body.data().empty()) throw ConfigError("setting '" + section + "' must belong to a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (std::find(kKeys.begin(), kKeys.end(), full) == kKeys.end()) throw ConfigError("unknown setting '" + full + "'");
      values[full] = trim(value.data());
    }
  }
  const auto has = [&](const std::string& k) { return values.count(k) != 0; };
  const auto num = [&](const std::string& k, double fallback) { return has(k) ? to_number(k, values[k]) : fallback; };
  const auto str = [&](const std::string& k, const std::string& fallback) { return has(k) ? values[k] : fallback; };
  const auto one_of = [&](const std::string& k, const std::string& fallback, std::initializer_list<const char*> ok) {
    const std::string v = str(k, fallback);
    for (const char* o : ok) {
      if (v == o) return v;
    }
    throw ConfigError(k + ": unsupported value '" + v + "'");
  };

  Settings s;
  NetworkParams& n = s.network;
  n.helper_density = num("network.helper_density", 0.05);
  n.user_density = num("network.user_density", 0.0);
  n.tx_power = num("network.tx_power", 1.0);
  n.pathloss_exp = num("network.pathloss_exp", 3.0);
  n.fading_desired = num("network.fading_desired", 1.0);
  n.fading_interf = num("network.fading_interf", 1.0);
  if (has("network.snr_db") && has("network.noise_power")) {
    throw ConfigError("network.snr_db and network.noise_power are mutually exclusive");
  }
  if (has("network.noise_power")) {
    n.noise_power = num("network.noise_power", 0.0);
  } else {
    s.snr_db = num("network.snr_db", 20.0);
    n.noise_power = n.tx_power / db_to_linear(*s.snr_db);
  }
  try {
    validate_params(n);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("network: ") + e.what());
  }

  if (has("library.count")) s.count = to_integer<std::size_t>("library.count", values["library.count"]);
  if (s.count < 2) throw ConfigError("library.count must be >= 2");
  s.gamma = num("library.zipf", 1.0);
  if (s.gamma < 0.0) throw ConfigError("library.zipf must be >= 0");
  s.rate_mode = one_of("library.rate_mode", "uniform", {"uniform", "constant"});
  s.rate = num("library.rate", 1.0);
  if (!(s.rate > 0.0)) throw ConfigError("library.rate must be positive");
  if (has("library.rate_seed")) s.rate_seed = to_integer<std::uint64_t>("library.rate_seed", values["library.rate_seed"]);

  if (has("policy.memory")) s.memory = to_integer<int>("policy.memory", values["policy.memory"]);
  if (s.memory < 1 || static_cast<std::size_t>(s.memory) >= s.count) {
    throw ConfigError("policy.memory must satisfy 1 <= memory < library.count");
  }
  s.policy_source = one_of("policy.source", "optimal", {"optimal", "mpc", "uc", "explicit"});
  if (has("policy.probs")) {
    for (const auto& v : split(values["policy.probs"], ',')) s.probs.push_back(to_number("policy.probs", v));
  }
  if (s.policy_source == "explicit" && s.probs.empty()) throw ConfigError("policy.source = explicit needs policy.probs");

  s.c_mode = one_of("interference.c_mode", "fixed", {"fixed", "load", "search"});
  s.c = num("interference.c", 40.0);
  if (!(s.c >= 1.0)) throw ConfigError("interference.c must be >= 1");
  s.c_max = num("interference.c_max", 1e4);
  if (!(s.c_max >= 1.0)) throw ConfigError("interference.c_max must be >= 1");
  try {
    s.load_mode = parse_load_mode(str("interference.load_mode", "instantaneous"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("interference.load_mode: ") + e.what());
  }
  s.sim_mode = one_of("simulate.mode", "noise", {"noise", "interference"});

  s.cdf_p = num("cdf.p", 1.0);
  if (has("cdf.points")) s.cdf_points = to_integer<std::size_t>("cdf.points", values["cdf.points"]);
  s.cdf_xi_max = num("cdf.xi_max", 0.0);

  if (has("run.trials")) s.trials = to_integer<std::size_t>("run.trials", values["run.trials"]);
  if (s.trials < 1) throw ConfigError("run.trials must be >= 1");
  if (has("run.seed")) s.seed = to_integer<std::uint64_t>("run.seed", values["run.seed"]);
  s.radius = num("run.radius", 0.0);
  if (s.radius < 0.0) throw ConfigError("run.radius must be >= 0");
  if (has("run.threads")) s.threads = to_integer<unsigned>("run.threads", values["run.threads"]);
  s.output = str("run.output", s.output);
  s.figure = str("run.figure", "");
  return s;
}

Config parse_config(const std::string& text) {
  Config config;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, config);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return config;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void set_value(Config& config, const std::string& key, const std::string& value) {
  if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) throw ConfigError("unknown setting '" + key + "'");
  config.put(key, value);
}

std::string to_csv(const Table& table, const std::string& manifest_name) {
  std::string out;
  const auto line = [&](const std::vector<std::string>& fields, const std::string& last) {
    for (const auto& f : fields) out += csv_field(f) + ",";
    out += csv_field(last) + "\r\n";
  };
  line(table.header, "manifest");
  for (const auto& row : table.rows) line(row, manifest_name);
  return out;
}

const std::vector<FigureInfo>& figure_registry() {
  static const std::vector<FigureInfo> registry = {
      {"3", "CDF of the smallest reciprocal gain, analytic vs empirical",
       "[figure]\nprocedure = cdf\n"
       "[network]\npathloss_exp = 2.5\nsnr_db = 20\n"
       "[cdf]\np = 1\npoints = 40\n"
       "[sweep]\nvariable = network.helper_density network.fading_desired\nvalues = 0.05:1, 0.05:3, 0.2:1\n"
       "[run]\ntrials = 100000\nseed = 1\n",
       "~5 s"},
      {"4", "Noise-limited success vs Zipf exponent: proposed, MPC, UC",
       "[figure]\nprocedure = optimize-noise\n"
       "[network]\nhelper_density = 0.05\nsnr_db = 20\npathloss_exp = 3\nfading_desired = 1\n"
       "[library]\ncount = 20\nrate_mode = uniform\nrate = 1\nrate_seed = 7\n"
       "[policy]\nmemory = 5\n"
       "[sweep]\nvariable = library.zipf\nvalues = 0, 0.5, 1, 1.5, 2, 2.5, 3\n"
       "[run]\ntrials = 20000\nseed = 1\n",
       "~5 s"},
      {"5", "Optimal noise-limited policy vs helper density and Nakagami m",
       "[figure]\nprocedure = optimize-noise\n"
       "[network]\nsnr_db = 20\npathloss_exp = 3\n"
       "[library]\ncount = 10\nzipf = 1\nrate_mode = uniform\nrate = 1\nrate_seed = 7\n"
       "[policy]\nmemory = 3\n"
       "[sweep]\nvariable = network.helper_density network.fading_desired\n"
       "values = 0.01:1, 0.05:1, 0.2:1, 0.01:3, 0.05:3, 0.2:3\n"
       "[run]\ntrials = 10000\nseed = 1\n",
       "~5 s"},
      {"6", "Optimal noise-limited policy vs maximum target rate",
       "[figure]\nprocedure = optimize-noise\n"
       "[network]\nhelper_density = 0.05\nsnr_db = 20\npathloss_exp = 3\n"
       "[library]\ncount = 10\nzipf = 1\nrate_mode = uniform\nrate_seed = 7\n"
       "[policy]\nmemory = 3\n"
       "[sweep]\nvariable = library.rate\nvalues = 0.25, 0.5, 1, 2, 4\n"
       "[run]\ntrials = 10000\nseed = 1\n",
       "~5 s"},
      {"7", "Optimal noise-limited policy vs cache memory",
       "[figure]\nprocedure = optimize-noise\n"
       "[network]\nhelper_density = 0.05\nsnr_db = 20\npathloss_exp = 3\n"
       "[library]\ncount = 10\nzipf = 1\nrate_mode = uniform\nrate = 1\nrate_seed = 7\n"
       "[sweep]\nvariable = policy.memory\nvalues = 1, 2, 3, 4, 5, 6\n"
       "[run]\ntrials = 10000\nseed = 1\n",
       "~5 s"},
      {"approx", "Load approximations and lower bound vs caching probability of the popular content",
       "[figure]\nprocedure = simulate\n"
       "[network]\nhelper_density = 1e-5\nuser_density = 2e-5\nnoise_power = 0\npathloss_exp = 3\n"
       "[library]\ncount = 2\nzipf = 1\nrate_mode = constant\nrate = 0.001\n"
       "[policy]\nmemory = 1\nsource = explicit\nprobs = 0.5, 0.5\n"
       "[interference]\nc_mode = fixed\nc = 40\n"
       "[simulate]\nmode = interference\n"
       "[sweep]\nvariable = policy.probs\n"
       "values = 0:1, 0.1:0.9, 0.2:0.8, 0.3:0.7, 0.4:0.6, 0.5:0.5, 0.6:0.4, 0.7:0.3, 0.8:0.2, 0.9:0.1, 1:0\n"
       "[run]\ntrials = 10000\nseed = 1\n",
       "~15 s"},
      {"8", "Interference-limited success vs target rate: brute-force optimum vs bound-optimal policy",
       "[figure]\nprocedure = brute-force-sir\ngrid_step = 0.1\n"
       "[network]\nhelper_density = 1e-5\nuser_density = 2e-5\nnoise_power = 0\npathloss_exp = 3\n"
       "[library]\ncount = 2\nzipf = 1\nrate_mode = constant\nrate = 0.001\n"
       "[policy]\nmemory = 1\n"
       "[interference]\nc_mode = search\nload_mode = instantaneous\n"
       "[sweep]\nvariable = library.rate\nvalues = 0.001, 0.01, 0.05, 0.1\n"
       "[run]\ntrials = 2000\nseed = 1\n",
       "~1.5 min"},
      {"9", "Interference-limited success vs Zipf exponent: searched c, load-based c, MPC, UC",
       "[figure]\nprocedure = compare-sir\n"
       "[network]\nhelper_density = 1e-5\nuser_density = 2e-5\nnoise_power = 0\npathloss_exp = 3\n"
       "[library]\ncount = 5\nrate_mode = constant\nrate = 0.001\n"
       "[policy]\nmemory = 1\n"
       "[interference]\nload_mode = instantaneous\n"
       "[sweep]\nvariable = library.zipf\nvalues = 0, 0.5, 1, 1.5, 2, 2.5, 3\n"
       "[run]\ntrials = 2000\nseed = 1\n",
       "~20 s"},
      {"10", "Bound-optimal interference-limited policy vs user density",
       "[figure]\nprocedure = optimize-sir\n"
       "[network]\nhelper_density = 1e-5\nnoise_power = 0\npathloss_exp = 3\n"
       "[library]\ncount = 7\nzipf = 1\nrate_mode = constant\nrate = 0.001\n"
       "[policy]\nmemory = 1\n"
       "[interference]\nc_mode = search\nload_mode = instantaneous\n"
       "[sweep]\nvariable = network.user_density\nvalues = 1e-5, 2e-5, 5e-5, 1e-4\n"
       "[run]\ntrials = 2000\nseed = 1\n",
       "~20 s"},
  };
  return registry;
}

const FigureInfo& find_figure(const std::string& id) {
  for (const auto& f : figure_registry()) {
    if (f.id == id) return f;
  }
  throw ConfigError("unknown figure id '" + id + "'");
}

Table list_figures() {
  Table t;
  t.header = {"id", "title", "procedure", "sweep_variable", "sweep_values", "trials", "expected_runtime", "config"};
  for (const auto& f : figure_registry()) {
    const Config c = parse_config(f.config);
    std::string flat;
    for (const auto& [section, body] : c) {
      for (const auto& [key, value] : body) flat += (flat.empty() ? "" : "; ") + section + "." + key + "=" + value.data();
    }
    t.rows.push_back({f.id, f.title, c.get<std::string>("figure.procedure", ""), c.get<std::string>("sweep.variable", ""),
                      c.get<std::string>("sweep.values", ""), c.get<std::string>("run.trials", ""), f.expected_runtime,
                      flat});
  }
  return t;
}

Table evaluate(Scenario scenario, const Config& config) {
  switch (scenario) {
    case Scenario::cdf: return run_cdf(config);
    case Scenario::optimize_noise: return run_optimize_noise(config);
    case Scenario::optimize_sir: return run_optimize_sir(config);
    case Scenario::simulate: return run_simulate(config);
    case Scenario::figure: return run_figure(config);
    case Scenario::list_figures: return list_figures();
  }
  throw ConfigError("unknown scenario");
}

RunResult run(Scenario scenario, const Config& config) {
  const auto start = std::chrono::steady_clock::now();
  Config effective = config;
  if (scenario == Scenario::figure) {
    const std::string id = trim(config.get<std::string>("run.figure", ""));
    if (id.empty()) throw ConfigError("figure scenario requires a figure id (--figure or run.figure)");
    effective = overlay(parse_config(find_figure(id).config), config);
  }
  const Settings settings = resolve(effective);
  const Table table = evaluate(scenario, config);

  namespace fs = std::filesystem;
  RunResult result;
  result.csv_path = settings.output;
  fs::path manifest = fs::path(settings.output);
  manifest.replace_extension(".manifest.json");
  result.manifest_path = manifest.string();
  result.rows = table.rows.size();

  const auto write = [](const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file '" + path + "'");
    out << body;
    if (!out) throw ConfigError("failed writing '" + path + "'");
  };
  write(result.csv_path, to_csv(table, manifest.filename().string()));

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json m;
  m["tool"] = "cachegeo";
  m["version"] = CACHEGEO_VERSION;
  m["scenario"] = std::string(to_string(scenario));
  m["seed"] = settings.seed;
  m["trials"] = settings.trials;
  m["config"] = config_json(effective);
  m["csv"] = fs::path(result.csv_path).filename().string();
  m["rows"] = result.rows;
  m["columns"] = table.header;
  m["wall_time_s"] = wall;
  m["units"] = {{"density", "per m^2"}, {"power", "linear watts"}, {"rate", "bits/s/Hz"}, {"distance", "m"}};
  nlohmann::json notes = nlohmann::json::array();
  if (settings.snr_db) {
    notes.push_back("network.snr_db = " + format(*settings.snr_db) + " dB converted to noise_power = tx_power / 10^(snr_db/10) = " +
                    format(settings.network.noise_power) + " W");
  }
  m["notes"] = notes;
  write(result.manifest_path, m.dump(2) + "\n");
  return result;
}

}  // namespace cachegeo::experiments
