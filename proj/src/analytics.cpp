#include "cachegeo/analytics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "cachegeo/quadrature.hpp"

namespace cachegeo {
namespace {

using std::numbers::pi;

// 2^rho - 1 without cancellation for small rho.
double rate_threshold(double rho) { return std::expm1(rho * std::numbers::ln2); }

void require_probability(double p, const char* where) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(where) + ": p must lie in [0,1]");
}

void require_policy(const ContentLibrary& library, const CachingPolicy& policy, const char* where) {
  if (policy.probs.size() != library.count()) {
    throw std::invalid_argument(std::string(where) + ": policy and library sizes differ");
  }
  if (auto violation = check_budget(policy)) {
    throw std::invalid_argument(std::string(where) + ": " + *violation);
  }
}

// j-th scaled s-derivative of 1 - (1 + x/m)^-m as a function of x = s P v^-alpha:
// s^j d^j/ds^j. For j >= 1 this is
//   -(-1)^j (m)_j / m^j * (x / (1 + x/m))^j * (1 + x/m)^-m.
double mgf_complement_derivative(double x, double m, int j) {
  if (!std::isfinite(x)) return j == 0 ? 1.0 : 0.0;
  const double log_base = std::log1p(x / m);
  if (j == 0) return -std::expm1(-m * log_base);
  double coeff = 1.0;
  for (int k = 0; k < j; ++k) coeff *= (m + k) / m;
  const double sign = (j % 2 == 0) ? -1.0 : 1.0;
  const double ratio = x / (1.0 + x / m);
  return sign * coeff * std::pow(ratio, j) * std::exp(-m * log_base);
}

}  // namespace

double fading_moment(double m, double delta) {
  return std::exp(std::lgamma(delta + m) - std::lgamma(m) - delta * std::log(m));
}

double kappa(const NetworkParams& params) {
  validate_params(params);
  return pi * params.helper_density * fading_moment(params.fading_desired, params.delta());
}

NoiseConstants noise_constants(const ContentLibrary& library, const NetworkParams& params) {
  validate_params(params);
  if (!(params.noise_power > 0.0)) {
    throw std::invalid_argument("noise_constants: noise_power must be positive in a noise-limited network");
  }
  NoiseConstants nc;
  nc.kappa = kappa(params);
  nc.delta = params.delta();
  nc.T.reserve(library.count());
  for (double rho : library.rates) nc.T.push_back(std::pow(params.snr() / rate_threshold(rho), nc.delta));
  return nc;
}

double intensity_xi(double y, double p, const NetworkParams& params) {
  require_probability(p, "intensity_xi");
  if (!(y >= 0.0)) throw std::invalid_argument("intensity_xi: y must be >= 0");
  if (p == 0.0 || params.helper_density == 0.0) return 0.0;
  const double delta = params.delta();
  return kappa(params) * p * delta * std::pow(y, delta - 1.0);
}

double xi1_cdf(double xi, double p, const NetworkParams& params) {
  require_probability(p, "xi1_cdf");
  if (!(xi >= 0.0)) throw std::invalid_argument("xi1_cdf: xi must be >= 0");
  if (std::isinf(xi)) return p > 0.0 && params.helper_density > 0.0 ? 1.0 : 0.0;
  return -std::expm1(-kappa(params) * p * std::pow(xi, params.delta()));
}

double success_noise(const ContentLibrary& library, const NetworkParams& params,
                     const CachingPolicy& policy) {
  require_policy(library, policy, "success_noise");
  const NoiseConstants nc = noise_constants(library, params);
  std::vector<double> terms(library.count());
  for (std::size_t i = 0; i < library.count(); ++i) {
    terms[i] = -library.popularity[i] * std::expm1(-nc.kappa * policy.probs[i] * nc.T[i]);
  }
  return stable_sum(terms);
}

double c_alpha(double alpha) {
  if (!(alpha > 2.0)) throw std::invalid_argument("c_alpha: alpha must exceed 2");
  const double x = 2.0 * pi / alpha;
  return x / std::sin(x);
}

namespace {

constexpr double kSeriesMinTau = 1.25;

// sum_{k >= first} (-1)^(k - first) tau^-k / (h k + 1), for tau > 1.
double alternating_tau_series(double tau, double h, int first) {
  const double r = 1.0 / tau;
  double power = std::pow(r, first);
  double sum = 0.0;
  double sign = 1.0;
  for (int k = first; k < first + 2000; ++k) {
    const double term = power / (h * k + 1.0);
    sum += sign * term;
    if (term <= 1e-17 * std::abs(sum)) break;
    power *= r;
    sign = -sign;
  }
  return sum;
}

}  // namespace

double c_tau_alpha(double tau, double alpha) {
  if (!(alpha > 2.0)) throw std::invalid_argument("c_tau_alpha: alpha must exceed 2");
  if (!(tau > 0.0)) throw std::invalid_argument("c_tau_alpha: tau must be positive");
  const double half = alpha / 2.0;
  const double upper = std::pow(tau, -2.0 / alpha);
  // Termwise integration of 1 / (1 + u^h) on [0, tau^-delta].
  if (tau >= kSeriesMinTau) return upper * alternating_tau_series(tau, half, 0);
  const auto integrand = [half](double u) { return 1.0 / (1.0 + std::pow(u, half)); };
  if (upper <= 1.0) return quad::finite(integrand, 0.0, upper, "c_tau_alpha");
  // Long range: complete integral minus the algebraic tail past `upper`.
  return c_alpha(alpha) - quad::tail(integrand, upper, half - 1.0, "c_tau_alpha tail");
}

InterferenceConstants interference_constants_from_tau(std::vector<double> tau, double alpha, double c) {
  InterferenceConstants ic;
  ic.c = c;
  ic.alpha = alpha;
  const double ca = c_alpha(alpha);
  const double delta = 2.0 / alpha;
  const double half = alpha / 2.0;
  for (double t : tau) {
    if (!(t > 0.0)) throw std::invalid_argument("interference_constants: tau must be positive");
    const double scale = std::pow(t, delta);
    const double upper = 1.0 / scale;
    double a = scale * c_tau_alpha(t, alpha);
    double one_minus = 1.0 - a;
    if (t >= kSeriesMinTau) {
      one_minus = alternating_tau_series(t, half, 1);
      a = 1.0 - one_minus;
    } else if (upper <= 1.0) {
      // 1 - A = tau^delta * int_0^upper u^(a/2) / (1 + u^(a/2)) du, no cancellation near A = 1.
      one_minus = scale * quad::finite(
                              [half](double u) {
                                const double w = std::pow(u, half);
                                return w / (1.0 + w);
                              },
                              0.0, upper, "1 - A");
      a = 1.0 - one_minus;
    }
    ic.A.push_back(a);
    ic.one_minus_A.push_back(one_minus);
    ic.B.push_back(scale * ca);
  }
  ic.tau = std::move(tau);
  return ic;
}

InterferenceConstants interference_constants(const ContentLibrary& library, double alpha, double c) {
  if (!(c >= 1.0)) throw std::invalid_argument("interference_constants: c must be >= 1");
  std::vector<double> tau;
  tau.reserve(library.count());
  for (double rho : library.rates) tau.push_back(rate_threshold(c * rho));
  return interference_constants_from_tau(std::move(tau), alpha, c);
}

double rayleigh_lower_bound(const ContentLibrary& library, const InterferenceConstants& consts,
                            const CachingPolicy& policy) {
  require_policy(library, policy, "rayleigh_lower_bound");
  if (consts.B.size() != library.count()) {
    throw std::invalid_argument("rayleigh_lower_bound: constants do not match the library");
  }
  std::vector<double> terms(library.count());
  for (std::size_t i = 0; i < library.count(); ++i) {
    const double p = policy.probs[i];
    terms[i] = library.popularity[i] * p / (consts.one_minus_A[i] * p + consts.B[i]);
  }
  return stable_sum(terms);
}

std::vector<double> laplace_interference_derivatives(double s, double r, double p,
                                                     const NetworkParams& params, int order) {
  validate_params(params);
  require_probability(p, "laplace_interference");
  if (!(s >= 0.0)) throw std::invalid_argument("laplace_interference: s must be >= 0");
  if (!(r >= 0.0)) throw std::invalid_argument("laplace_interference: r must be >= 0");
  if (order < 0) throw std::invalid_argument("laplace_interference: order must be >= 0");

  std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
  out[0] = 1.0;
  if (s == 0.0 || params.helper_density == 0.0 || params.tx_power == 0.0) return out;

  const double alpha = params.pathloss_exp;
  const double m = params.fading_interf;
  const double sp = s * params.tx_power;
  const double scale = std::pow(sp, 1.0 / alpha);
  const double lambda = params.helper_density;

  // h[j] = s^j g^(j)(s), where log L = g.
  std::vector<double> h(out.size());
  for (int j = 0; j <= order; ++j) {
    const auto integrand = [=](double v) {
      if (v <= 0.0) return 0.0;
      return mgf_complement_derivative(sp * std::pow(v, -alpha), m, j) * v;
    };
    const double all = quad::semi_infinite(integrand, scale, alpha - 2.0, "laplace_interference (plane)");
    const double near = p > 0.0 ? quad::finite(integrand, 0.0, r, "laplace_interference (exclusion)") : 0.0;
    h[static_cast<std::size_t>(j)] = 2.0 * pi * lambda * (p * near - all);
  }

  // Scaled exp-composition: Lambda_n = sum_k C(n-1,k) h_{k+1} Lambda_{n-1-k}.
  std::vector<double> scaled(out.size(), 0.0);
  scaled[0] = 1.0;
  for (std::size_t n = 1; n < scaled.size(); ++n) {
    double binom = 1.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += binom * h[k + 1] * scaled[n - 1 - k];
      binom = binom * static_cast<double>(n - 1 - k) / static_cast<double>(k + 1);
    }
    scaled[n] = acc;
  }
  const double value = std::exp(h[0]);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = value * scaled[n];
  return out;
}

double laplace_interference(double s, double r, double p, const NetworkParams& params) {
  return laplace_interference_derivatives(s, r, p, params, 0)[0];
}

double nakagami_lower_bound(const ContentLibrary& library, const NetworkParams& params,
                            const CachingPolicy& policy, double c) {
  require_policy(library, policy, "nakagami_lower_bound");
  validate_params(params);
  const double md = params.fading_desired;
  if (md < 1.0 || std::floor(md) != md) {
    throw std::invalid_argument("nakagami_lower_bound: unsupported non-integer fading_desired");
  }
  if (!(c >= 1.0)) throw std::invalid_argument("nakagami_lower_bound: c must be >= 1");
  if (!(params.helper_density > 0.0) || !(params.tx_power > 0.0)) {
    throw std::invalid_argument("nakagami_lower_bound: helper_density and tx_power must be positive");
  }
  const int terms = static_cast<int>(md);
  const double alpha = params.pathloss_exp;

  std::vector<double> contributions(library.count(), 0.0);
  for (std::size_t i = 0; i < library.count(); ++i) {
    const double p = policy.probs[i];
    const double f = library.popularity[i];
    if (p == 0.0 || f == 0.0) continue;
    const double tau = rate_threshold(c * library.rates[i]);
    // Distance to the nearest content-i helper, written through w = pi p lambda r^2
    // so the outer density becomes exp(-w).
    const double area = pi * p * params.helper_density;
    const auto conditional_success = [&](double w) {
      const double r = std::sqrt(w / area);
      if (r == 0.0) return 1.0;
      const double s = md * tau * std::pow(r, alpha) / params.tx_power;
      const auto d = laplace_interference_derivatives(s, r, p, params, terms - 1);
      double acc = 0.0;
      double factorial = 1.0;
      for (int k = 0; k < terms; ++k) {
        if (k > 0) factorial *= k;
        acc += ((k % 2 == 0) ? 1.0 : -1.0) * d[static_cast<std::size_t>(k)] / factorial;
      }
      return acc;
    };
    const double value = quad::semi_infinite_exponential(
        [&](double w) { return conditional_success(w) * std::exp(-w); }, "nakagami_lower_bound (distance)",
        quad::Tolerance{1e-9, 1e-9});
    contributions[i] = f * value;
  }
  return stable_sum(contributions);
}

double mean_load_m1(double f, double p, double user_density, double helper_density) {
  if (!(p > 0.0)) throw std::invalid_argument("mean_load_m1: p must be positive (load is unbounded at p = 0)");
  if (!(helper_density > 0.0)) throw std::invalid_argument("mean_load_m1: helper_density must be positive");
  return 1.0 + 1.28 * f * user_density / (p * helper_density);
}

double load_based_c(int memory, double user_density, double helper_density) {
  if (!(helper_density > 0.0)) throw std::invalid_argument("load_based_c: helper_density must be positive");
  return std::max(1.0, memory * user_density / helper_density);
}

double find_tight_c(const std::function<double(double, const CachingPolicy&)>& bound,
                    std::span<const CachingPolicy> policies, std::span<const double> reference,
                    double c_max) {
  if (policies.size() != reference.size()) {
    throw std::invalid_argument("find_tight_c: policies and reference differ in length");
  }
  const auto holds = [&](double c) {
    for (std::size_t k = 0; k < policies.size(); ++k) {
      if (bound(c, policies[k]) > reference[k]) return false;
    }
    return true;
  };
  if (holds(1.0)) return 1.0;
  if (!holds(c_max)) {
    std::ostringstream os;
    os << "find_tight_c: bound exceeds the reference even at c = " << c_max;
    throw NumericFailure(os.str());
  }
  double lo = 1.0;
  double hi = c_max;
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace cachegeo
