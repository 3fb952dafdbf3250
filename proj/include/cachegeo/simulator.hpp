#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "cachegeo/model.hpp"
#include "cachegeo/placement.hpp"

namespace cachegeo {

using Rng = std::mt19937_64;

/// Independent engine for (seed, stream, index). Every trial owns one, so a
/// run is reproducible no matter how trials are scheduled across threads.
Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Homogeneous PPP on the disc of the given radius centred at the origin.
std::vector<Point> sample_ppp(double intensity, double radius, Rng& rng);

/// Unit-mean Nakagami-m power gain, i.e. Gamma(m, 1/m).
double nakagami_gain(double m, Rng& rng);

/// One sampled network around the typical user at the origin.
struct Realization {
  double radius = 0.0;
  std::vector<Point> helpers;
  std::vector<std::vector<std::size_t>> caches;  // per helper, ascending content indices
  std::vector<Point> users;                      // other users
  std::vector<std::size_t> requested;            // per other user
  std::size_t typical_request = 0;
  // Power gain of the typical user's link to each helper: Nakagami-m_D when the
  // helper caches typical_request, Nakagami-m_I otherwise. Links of the other
  // users are drawn on demand during association and not stored.
  std::vector<double> typical_gains;
};

Realization sample_realization(const ContentLibrary& library, const NetworkParams& params,
                               const BlockLayout& layout, double radius, Rng& rng);

struct ReciprocalGain {
  double xi = 0.0;  // r^alpha / gain
  std::size_t helper = 0;
};

/// Smallest r^alpha / gain over helpers caching `content`; ties go to the
/// lower helper index. nullopt when no helper in the window caches it.
std::optional<ReciprocalGain> smallest_reciprocal(const Realization& realization, std::size_t content,
                                                  double alpha);

struct LinkOutcome {
  double xi_min = 0.0;
  std::size_t serving_helper = 0;
  double interference = 0.0;  // watts, all other helpers
  double load = 1.0;
  double rate = 0.0;          // bits/s/Hz
  bool success = false;
};

/// Rate of the typical user served by the best instantaneous helper for
/// `content` with the given load: log2(1 + P / (xi (sigma^2 + J))) / load.
std::optional<LinkOutcome> evaluate_link(const Realization& realization, const NetworkParams& params,
                                         std::size_t content, double target_rate, double load);

struct SimulationOptions {
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  double radius = 0.0;   // window radius in meters; 0 selects it automatically
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;  // binomial
  std::size_t trials = 0;
  std::size_t successes = 0;
};

Estimate make_estimate(std::size_t successes, std::size_t trials);

/// Delivery success without interference or resource sharing.
Estimate simulate_noise_limited(const ContentLibrary& library, const NetworkParams& params,
                                const CachingPolicy& policy, const SimulationOptions& options);

enum class LoadMode {
  instantaneous,  // random load of the serving helper, instantaneous association
  mean_approx,    // mean of that load per content, instantaneous association
  long_term,      // mean load and SIR under nearest-helper association
};

/// Accepts "instantaneous", "mean-approx", "long-term" (and the equation
/// aliases "24", "29", "50"). Throws std::invalid_argument otherwise.
LoadMode parse_load_mode(std::string_view name);
std::string_view to_string(LoadMode mode);

/// All three load modes evaluated on common realizations.
struct InterferenceReport {
  Estimate instantaneous;
  Estimate mean_approx;
  Estimate long_term;
  std::vector<double> mean_load_instantaneous;  // per content, over served trials
  std::vector<double> mean_load_long_term;
  std::vector<std::size_t> served_trials;       // per requested content
  double radius = 0.0;
};

InterferenceReport simulate_interference(const ContentLibrary& library, const NetworkParams& params,
                                         const CachingPolicy& policy, const SimulationOptions& options);

Estimate simulate_interference_limited(const ContentLibrary& library, const NetworkParams& params,
                                       const CachingPolicy& policy, const SimulationOptions& options,
                                       LoadMode mode);

/// Samples of the smallest reciprocal gain for helpers caching a content
/// independently with probability p (+inf when none lies in the window).
std::vector<double> sample_xi_min(const NetworkParams& params, double p, std::size_t samples,
                                  std::uint64_t seed, double radius = 0.0);

/// Radius with exp(-p lambda pi R^2) = 1e-3: the nearest helper caching a
/// content with probability p lies outside with probability 1e-3.
double coverage_radius(double helper_density, double p);

}  // namespace cachegeo
