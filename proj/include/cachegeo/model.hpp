#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cachegeo {

/// Raised when an iterative or quadrature routine cannot reach its tolerance.
/// The message carries the routine name and its last state.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Content catalogue: request probabilities and per-content target rates
/// (bits/s/Hz). Index 0 is the most popular content.
struct ContentLibrary {
  std::vector<double> popularity;
  std::vector<double> rates;

  std::size_t count() const { return popularity.size(); }
};

/// Builds a library and checks its invariants (throws std::invalid_argument).
ContentLibrary make_library(std::vector<double> popularity, std::vector<double> rates);

/// Densities are per m^2, powers are linear watts.
struct NetworkParams {
  double helper_density = 0.05;
  double user_density = 0.0;
  double tx_power = 1.0;
  double noise_power = 0.01;
  double pathloss_exp = 3.0;
  double fading_desired = 1.0;
  double fading_interf = 1.0;

  double delta() const { return 2.0 / pathloss_exp; }
  /// P / sigma^2; infinite for a noiseless network.
  double snr() const;
};

/// Throws std::invalid_argument naming the first bad field.
void validate_params(const NetworkParams& params);

double db_to_linear(double db);

struct CachingPolicy {
  std::vector<double> probs;
  int memory = 1;
};

/// Slack allowed on the memory budget so that converged solver output is accepted.
inline constexpr double kBudgetTolerance = 1e-9;

/// Zipf request probabilities f_i = i^-gamma / sum_j j^-gamma.
std::vector<double> zipf_popularity(std::size_t count, double gamma);

/// Returns nullopt when the policy is feasible, otherwise a description of
/// the first violated constraint. The library size is probs.size().
std::optional<std::string> validate_policy(const CachingPolicy& policy);

/// Same checks without M < F; enough for placing and evaluating a policy.
std::optional<std::string> check_budget(const CachingPolicy& policy);

/// Per-content rates drawn i.i.d. uniform on (0, rho_max]; deterministic in seed.
std::vector<double> uniform_rates(double rho_max, std::size_t count, std::uint64_t seed);
std::vector<double> constant_rates(double rho, std::size_t count);

/// Neumaier-compensated sum.
double stable_sum(std::span<const double> values);

}  // namespace cachegeo
