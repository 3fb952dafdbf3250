#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cachegeo/analytics.hpp"
#include "cachegeo/model.hpp"

namespace cachegeo {

struct SolveOptions {
  double tolerance = 1e-9;  // on |sum p - M|
  int max_iterations = 200;
};

/// Output of the multiplier bisection.
struct SolveReport {
  CachingPolicy policy;
  double omega = 0.0;      // multiplier of the memory budget
  std::vector<double> mu;  // multipliers of p_i <= 1
  double objective = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
};

/// p_i(omega, mu_i) = [log(f kappa T) - log(omega + mu)]^+ / (kappa T), unclamped above.
double noise_candidate(double omega, double mu, double f, double kappa, double T);

/// (l_i, u_i) = (f kappa T e^{-kappa T}, f kappa T): the omega values at which
/// the candidate reaches 1 and 0.
std::pair<double, double> noise_multiplier_bounds(double f, double kappa, double T);

/// Optimal caching probabilities for the noise-limited success probability.
SolveReport optimize_noise(const ContentLibrary& library, const NetworkParams& params, int memory,
                           SolveOptions options = {});

/// p_i(omega, mu_i) = [-B + sqrt(f B / (omega + mu))]^+ / (1 - A). When
/// 1 - A vanishes the objective term is linear and the candidate is 0 or 1.
double interference_candidate(double omega, double mu, double f, double one_minus_A, double B);

/// (l_i, u_i) = (f B / (1 - A + B)^2, f / B).
std::pair<double, double> interference_multiplier_bounds(double f, double one_minus_A, double B);

/// Caching probabilities maximizing the Rayleigh lower bound.
SolveReport optimize_interference(const ContentLibrary& library, const InterferenceConstants& consts,
                                  int memory, SolveOptions options = {});

enum class Baseline { most_popular, uniform };

/// MPC: p_i = 1 for the M most popular contents. UC: p_i = M / F.
CachingPolicy baseline_policy(Baseline kind, std::size_t count, int memory);

struct BruteForceResult {
  CachingPolicy policy;
  double value = 0.0;
  std::size_t evaluated = 0;
};

/// Exhaustive search over {0, step, ..., 1}^F with sum <= M. Ties keep the
/// lexicographically first point. Throws std::invalid_argument when the grid
/// exceeds kBruteForceLimit points.
BruteForceResult brute_force_policy(const std::function<double(const CachingPolicy&)>& objective,
                                    std::size_t count, int memory, double grid_step);

inline constexpr double kBruteForceLimit = 2e8;

/// Largest minus smallest probability; the uniformity statistic used in sweeps.
double policy_spread(const CachingPolicy& policy);

}  // namespace cachegeo
