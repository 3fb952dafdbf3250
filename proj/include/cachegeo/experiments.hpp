#pragma once

#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cachegeo/model.hpp"
#include "cachegeo/simulator.hpp"

namespace cachegeo::experiments {

using Config = boost::property_tree::ptree;

/// Invalid configuration or command line; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scenario { cdf, optimize_noise, optimize_sir, simulate, figure, list_figures };

Scenario parse_scenario(std::string_view name);
std::string_view to_string(Scenario scenario);

/// Typed view of a configuration. Densities per m^2, powers in linear watts,
/// rates in bits/s/Hz; snr_db is converted to a linear noise power.
struct Settings {
  NetworkParams network;
  std::optional<double> snr_db;

  std::size_t count = 10;
  double gamma = 1.0;
  std::string rate_mode = "uniform";  // uniform | constant
  double rate = 1.0;                  // rho_max (uniform) or rho (constant)
  std::uint64_t rate_seed = 7;

  int memory = 3;
  std::string policy_source = "optimal";  // optimal | mpc | uc | explicit
  std::vector<double> probs;

  std::string c_mode = "fixed";  // fixed | load | search
  double c = 40.0;
  double c_max = 1e4;
  LoadMode load_mode = LoadMode::instantaneous;
  std::string sim_mode = "noise";  // noise | interference

  double cdf_p = 1.0;
  std::size_t cdf_points = 25;
  double cdf_xi_max = 0.0;

  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  double radius = 0.0;
  unsigned threads = 0;
  std::string output = "cachegeo_results.csv";
  std::string figure;

  ContentLibrary library() const;
  SimulationOptions simulation(std::uint64_t salt = 0) const;
};

/// Resolves and validates a configuration. Unknown keys and malformed values
/// raise ConfigError.
Settings resolve(const Config& config);

/// Reads an INI file ([section] / key = value, ';' or '#' comments).
Config load_config(const std::string& path);
Config parse_config(const std::string& text);

/// Sets "section.key" after checking that the key is known.
void set_value(Config& config, const std::string& key, const std::string& value);

/// Known configuration keys ("section.key"), in documentation order.
const std::vector<std::string>& known_keys();

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 serialization; every row carries the manifest file name.
std::string to_csv(const Table& table, const std::string& manifest_name);

struct FigureInfo {
  std::string id;
  std::string title;
  std::string config;  // INI text with the figure's parameter set
  std::string expected_runtime;
};

/// Reproducible figures, the single source of their parameter sets.
const std::vector<FigureInfo>& figure_registry();
const FigureInfo& find_figure(const std::string& id);
Table list_figures();

/// Computes the result table of a scenario without touching the filesystem.
Table evaluate(Scenario scenario, const Config& config);

struct RunResult {
  std::string csv_path;
  std::string manifest_path;
  std::size_t rows = 0;
};

/// Evaluates, then writes the CSV and its JSON manifest.
RunResult run(Scenario scenario, const Config& config);

}  // namespace cachegeo::experiments
