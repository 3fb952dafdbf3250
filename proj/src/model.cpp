#include "cachegeo/model.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace cachegeo {

double stable_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

ContentLibrary make_library(std::vector<double> popularity, std::vector<double> rates) {
  if (popularity.empty()) throw std::invalid_argument("library: empty popularity vector");
  if (rates.size() != popularity.size()) {
    throw std::invalid_argument("library: rates and popularity differ in length");
  }
  for (std::size_t i = 0; i < popularity.size(); ++i) {
    if (!(popularity[i] >= 0.0) || !std::isfinite(popularity[i])) {
      throw std::invalid_argument("library: popularity entries must be finite and nonnegative");
    }
    if (i > 0 && popularity[i] > popularity[i - 1]) {
      throw std::invalid_argument("library: popularity must be nonincreasing in index");
    }
    if (!(rates[i] > 0.0) || !std::isfinite(rates[i])) {
      throw std::invalid_argument("library: rates must be positive and finite");
    }
  }
  if (std::abs(stable_sum(popularity) - 1.0) > 1e-12) {
    throw std::invalid_argument("library: popularity must sum to 1");
  }
  return ContentLibrary{std::move(popularity), std::move(rates)};
}

double NetworkParams::snr() const {
  if (noise_power == 0.0) return std::numeric_limits<double>::infinity();
  return tx_power / noise_power;
}

void validate_params(const NetworkParams& p) {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("network: ") + what); };
  if (!(p.helper_density >= 0.0)) fail("helper_density must be >= 0");
  if (!(p.user_density >= 0.0)) fail("user_density must be >= 0");
  if (!(p.tx_power >= 0.0)) fail("tx_power must be >= 0");
  if (!(p.noise_power >= 0.0)) fail("noise_power must be >= 0");
  if (!(p.pathloss_exp > 2.0) || !std::isfinite(p.pathloss_exp)) fail("pathloss_exp must be > 2");
  if (!(p.fading_desired >= 0.5)) fail("fading_desired must be >= 1/2");
  if (!(p.fading_interf >= 0.5)) fail("fading_interf must be >= 1/2");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::vector<double> zipf_popularity(std::size_t count, double gamma) {
  if (count == 0) throw std::invalid_argument("zipf_popularity: count must be >= 1");
  if (!(gamma >= 0.0)) throw std::invalid_argument("zipf_popularity: gamma must be >= 0");
  std::vector<double> f(count);
  for (std::size_t i = 0; i < count; ++i) f[i] = std::pow(static_cast<double>(i + 1), -gamma);
  const double norm = stable_sum(f);
  for (double& v : f) v /= norm;
  return f;
}

std::optional<std::string> validate_policy(const CachingPolicy& policy) {
  const std::size_t count = policy.probs.size();
  if (policy.memory >= 1 && static_cast<std::size_t>(policy.memory) >= count) {
    std::ostringstream os;
    os << "memory M=" << policy.memory << " must be smaller than library size F=" << count;
    return os.str();
  }
  return check_budget(policy);
}

std::optional<std::string> check_budget(const CachingPolicy& policy) {
  const std::size_t count = policy.probs.size();
  if (policy.memory < 1) return "memory M must be a positive integer";
  for (std::size_t i = 0; i < count; ++i) {
    const double p = policy.probs[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream os;
      os << "p[" << i + 1 << "]=" << p << " outside [0,1]";
      return os.str();
    }
  }
  const double total = stable_sum(policy.probs);
  if (total > policy.memory + kBudgetTolerance) {
    std::ostringstream os;
    os << "sum of probabilities " << total << " exceeds memory M=" << policy.memory;
    return os.str();
  }
  return std::nullopt;
}

std::vector<double> uniform_rates(double rho_max, std::size_t count, std::uint64_t seed) {
  if (!(rho_max > 0.0) || !std::isfinite(rho_max)) {
    throw std::invalid_argument("uniform_rates: rho_max must be positive");
  }
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> rates(count);
  // 1 - U maps [0,1) onto (0,1].
  for (double& r : rates) r = rho_max * (1.0 - unit(engine));
  return rates;
}

std::vector<double> constant_rates(double rho, std::size_t count) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("constant_rates: rho must be positive");
  }
  return std::vector<double>(count, rho);
}

}  // namespace cachegeo
