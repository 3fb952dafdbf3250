#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cachegeo/experiments.hpp"
#include "cachegeo/model.hpp"

namespace ex = cachegeo::experiments;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cache placement experiments for stochastic wireless caching networks"};
  std::string scenario;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> out;
  std::optional<std::string> figure;
  std::vector<std::string> overrides;

  app.add_option("scenario", scenario, "cdf | optimize-noise | optimize-sir | simulate | figure | list-figures")
      ->required();
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--seed", seed, "Base seed of the Monte Carlo substreams");
  app.add_option("--trials", trials, "Monte Carlo trials per sweep point");
  app.add_option("--out", out, "Output CSV path; the manifest is written next to it");
  app.add_option("--figure", figure, "Figure id for the figure scenario (see list-figures)");
  app.add_option("--set", overrides, "Override a setting, section.key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const ex::Scenario kind = ex::parse_scenario(scenario);
    ex::Config config = config_path.empty() ? ex::Config{} : ex::load_config(config_path);
    // Precedence: --set and dedicated flags over the file over built-in defaults.
    for (const auto& item : overrides) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ex::ConfigError("--set expects section.key=value, got '" + item + "'");
      ex::set_value(config, item.substr(0, eq), item.substr(eq + 1));
    }
    if (seed) ex::set_value(config, "run.seed", std::to_string(*seed));
    if (trials) ex::set_value(config, "run.trials", std::to_string(*trials));
    if (out) ex::set_value(config, "run.output", *out);
    if (figure) ex::set_value(config, "run.figure", *figure);

    const ex::RunResult result = ex::run(kind, config);
    std::cout << "wrote " << result.rows << " rows to " << result.csv_path << " (manifest " << result.manifest_path
              << ")\n";
    return 0;
  } catch (const ex::ConfigError& e) {
    std::cerr << "cachegeo: invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "cachegeo: invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cachegeo::NumericFailure& e) {
    std::cerr << "cachegeo: numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "cachegeo: " << e.what() << "\n";
    return 1;
  }
}
