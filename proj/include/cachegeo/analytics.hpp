#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cachegeo/model.hpp"

namespace cachegeo {

// ---------------------------------------------------------------------------
// Noise-limited network
// ---------------------------------------------------------------------------

/// E[g^delta] for a unit-mean Gamma(m, 1/m) power gain.
double fading_moment(double m, double delta);

/// kappa = pi * lambda * Gamma(delta + m_D) / (m_D^delta * Gamma(m_D)).
double kappa(const NetworkParams& params);

struct NoiseConstants {
  double kappa = 0.0;
  double delta = 0.0;
  std::vector<double> T;  // (eta / (2^rho_i - 1))^delta
};

/// Requires a positive noise power.
NoiseConstants noise_constants(const ContentLibrary& library, const NetworkParams& params);

/// Intensity of the reciprocal-gain process of helpers caching a content with
/// probability p. Integrates to kappa * p * xi^delta over [0, xi).
double intensity_xi(double y, double p, const NetworkParams& params);

/// CDF of the smallest reciprocal channel gain among helpers caching a
/// content: 1 - exp(-kappa p xi^delta).
double xi1_cdf(double xi, double p, const NetworkParams& params);

/// Average delivery success probability without interference:
/// 1 - sum_i f_i exp(-kappa p_i T_i).
double success_noise(const ContentLibrary& library, const NetworkParams& params,
                     const CachingPolicy& policy);

// ---------------------------------------------------------------------------
// Interference-limited network
// ---------------------------------------------------------------------------

/// (2 pi / alpha) csc(2 pi / alpha). Throws for alpha <= 2.
double c_alpha(double alpha);

/// tau^(-2/alpha) 2F1(1, 2/alpha; 1 + 2/alpha; -1/tau), evaluated as
/// the integral of 1 / (1 + u^(alpha/2)) over [0, tau^(-2/alpha)].
double c_tau_alpha(double tau, double alpha);

/// Per-content constants of the Rayleigh lower bound for a load constant c.
struct InterferenceConstants {
  double c = 1.0;
  double alpha = 4.0;
  std::vector<double> tau;          // 2^(c rho_i) - 1
  std::vector<double> A;            // tau^(2/alpha) C_{tau,alpha}, in (0, 1]
  std::vector<double> one_minus_A;  // 1 - A, computed without cancellation
  std::vector<double> B;            // tau^(2/alpha) C_alpha
};

InterferenceConstants interference_constants(const ContentLibrary& library, double alpha, double c);

/// Builds constants from explicit tau values (used when A and B are given
/// directly rather than through target rates).
InterferenceConstants interference_constants_from_tau(std::vector<double> tau, double alpha, double c);

/// sum_i f_i p_i / ((1 - A_i) p_i + B_i).
double rayleigh_lower_bound(const ContentLibrary& library, const InterferenceConstants& consts,
                            const CachingPolicy& policy);

/// Laplace transform of the interference seen by a user whose serving helper
/// (nearest among those caching the content, at distance r) is excluded.
/// Nakagami-m_I interferers, all helpers active.
double laplace_interference(double s, double r, double p, const NetworkParams& params);

/// s^k d^k/ds^k L(s) for k = 0..order, computed from the exponent's
/// derivatives (each a quadrature of an analytically differentiated
/// integrand) through the exp-composition recursion.
std::vector<double> laplace_interference_derivatives(double s, double r, double p,
                                                     const NetworkParams& params, int order);

/// General Nakagami lower bound on the interference-limited success
/// probability. fading_desired must be a positive integer.
double nakagami_lower_bound(const ContentLibrary& library, const NetworkParams& params,
                            const CachingPolicy& policy, double c);

/// Mean load of the tagged helper for single-content caches (M = 1) under
/// nearest-helper association: 1 + 1.28 f lambda_u / (p lambda).
double mean_load_m1(double f, double p, double user_density, double helper_density);

/// c = M lambda_u / lambda, the average load of a typical helper.
double load_based_c(int memory, double user_density, double helper_density);

/// Smallest c in [1, c_max] with bound(c, policy_k) <= reference_k for all k.
/// The bound must be nonincreasing in c. Throws NumericFailure when even
/// c_max violates a reference value.
double find_tight_c(const std::function<double(double, const CachingPolicy&)>& bound,
                    std::span<const CachingPolicy> policies, std::span<const double> reference,
                    double c_max = 1e4);

}  // namespace cachegeo
