#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cachegeo/optimizer.hpp"

using namespace cachegeo;
using std::numbers::pi;

namespace {

// Helper density giving kappa * T = kt for every content of rate rho.
NetworkParams noise_params_for(double kt, double rho, double alpha = 3.0) {
  NetworkParams p;
  p.pathloss_exp = alpha;
  const double T = std::pow(p.snr() / (std::pow(2.0, rho) - 1.0), p.delta());
  p.helper_density = kt / (pi * std::tgamma(1.0 + p.delta()) * T);
  return p;
}

// Best p1 on a grid for a two-content problem with p2 = 1 - p1.
double grid_argmax(const std::function<double(double)>& objective, double step) {
  double best = 0.0;
  double best_value = -1.0;
  const long n = std::lround(1.0 / step);
  for (long k = 0; k <= n; ++k) {
    const double p1 = static_cast<double>(k) / n;
    const double v = objective(p1);
    if (v > best_value) {
      best_value = v;
      best = p1;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("noise candidate and bounds") {
  const double f = 0.3, kappa = 0.7, T = 2.0;
  const double kt = kappa * T;
  CHECK(noise_candidate(f * kt, 0.0, f, kappa, T) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(noise_candidate(f * kt * std::exp(-kt), 0.0, f, kappa, T) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(noise_candidate(2.0 * f * kt, 0.0, f, kappa, T) == 0.0);
  CHECK_THROWS_AS(noise_candidate(0.0, 0.0, f, kappa, T), std::invalid_argument);
  const auto [l, u] = noise_multiplier_bounds(0.5, 1.0, 2.0);
  CHECK(l == doctest::Approx(std::exp(-2.0)));
  CHECK(u == doctest::Approx(1.0));
  const auto [l0, u0] = noise_multiplier_bounds(0.5, 1.0, 1e-9);
  CHECK(l0 / u0 == doctest::Approx(1.0));
}

TEST_CASE("noise optimizer") {
  SUBCASE("two-content interior solution") {
    const auto p = noise_params_for(2.0, 1.0);
    const auto lib = make_library({0.75, 0.25}, {1.0, 1.0});
    const auto r = optimize_noise(lib, p, 1);
    const double expected = 0.5 + std::log(3.0) / 4.0;
    CHECK(r.policy.probs[0] == doctest::Approx(expected).epsilon(1e-8));
    CHECK(r.policy.probs[1] == doctest::Approx(1.0 - expected).epsilon(1e-8));
    const double grid = grid_argmax([&](double p1) { return success_noise(lib, p, {{p1, 1.0 - p1}, 1}); }, 1e-4);
    CHECK(std::abs(grid - r.policy.probs[0]) <= 1e-4);
    CHECK(r.kkt_residual <= 1e-9);
  }
  SUBCASE("symmetric problem") {
    const auto lib = make_library(zipf_popularity(8, 0.0), constant_rates(0.7, 8));
    const auto r = optimize_noise(lib, NetworkParams{}, 3);
    for (double v : r.policy.probs) CHECK(v == doctest::Approx(3.0 / 8.0).epsilon(1e-9));
  }
  SUBCASE("budget is used exactly") {
    const auto lib = make_library(zipf_popularity(10, 1.0), uniform_rates(1.0, 10, 7));
    for (int m = 1; m <= 6; ++m) {
      const auto r = optimize_noise(lib, NetworkParams{}, m);
      CHECK(std::abs(stable_sum(r.policy.probs) - m) <= 1e-9);
      CHECK_FALSE(validate_policy(r.policy).has_value());
    }
  }
  CHECK_THROWS_AS(optimize_noise(make_library({0.5, 0.5}, {1, 1}), NetworkParams{}, 2), std::invalid_argument);
}

TEST_CASE("interference candidate and bounds") {
  const double f = 0.4, oma = 0.2, B = 1.3;
  CHECK(interference_candidate(f / B, 0.0, f, oma, B) == doctest::Approx(0.0).epsilon(1e-12));
  const double l = f * B / ((oma + B) * (oma + B));
  CHECK(interference_candidate(l, 0.0, f, oma, B) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(interference_candidate(100.0 * f / B, 0.0, f, oma, B) == 0.0);
  const auto [lo, hi] = interference_multiplier_bounds(f, oma, B);
  CHECK(lo == doctest::Approx(l));
  CHECK(hi == doctest::Approx(f / B));
  // Linear term when A = 1: all or nothing.
  CHECK(interference_candidate(0.9 * f / B, 0.0, f, 0.0, B) == 1.0);
  CHECK(interference_candidate(1.1 * f / B, 0.0, f, 0.0, B) == 0.0);
}

TEST_CASE("interference optimizer") {
  const auto ic = interference_constants_from_tau({1.0, 1.0}, 4.0, 1.0);
  const double A = pi / 4.0, B = pi / 2.0;
  SUBCASE("interior solution") {
    const auto lib = make_library({0.55, 0.45}, {1.0, 1.0});
    const auto r = optimize_interference(lib, ic, 1);
    const double s1 = std::sqrt(0.55), s2 = std::sqrt(0.45);
    const double expected = (-B + s1 * (2.0 * B + 1.0 - A) / (s1 + s2)) / (1.0 - A);
    CHECK(expected == doctest::Approx(0.892).epsilon(1e-3));
    CHECK(r.policy.probs[0] == doctest::Approx(expected).epsilon(1e-8));
    const double grid =
        grid_argmax([&](double p1) { return rayleigh_lower_bound(lib, ic, {{p1, 1.0 - p1}, 1}); }, 1e-4);
    CHECK(std::abs(grid - r.policy.probs[0]) <= 1e-4);
  }
  SUBCASE("clamped solution") {
    const auto lib = make_library({0.75, 0.25}, {1.0, 1.0});
    const auto r = optimize_interference(lib, ic, 1);
    CHECK(r.policy.probs[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.policy.probs[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.mu[0] > 0.0);
    CHECK(r.omega >= 0.25 / B - 1e-9);
    CHECK(r.omega <= 0.75 * B / ((1.0 - A + B) * (1.0 - A + B)) + 1e-9);
    CHECK(r.kkt_residual <= 1e-9);
  }
  SUBCASE("symmetric problem") {
    const auto lib = make_library(zipf_popularity(6, 0.0), constant_rates(0.01, 6));
    const auto r = optimize_interference(lib, interference_constants(lib, 3.0, 2.0), 2);
    for (double v : r.policy.probs) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  }
  SUBCASE("linear terms") {
    const auto lib = make_library({0.5, 0.3, 0.2}, {1.0, 1.0, 1.0});
    auto lin = interference_constants_from_tau({1.0, 1.0, 1.0}, 4.0, 1.0);
    for (std::size_t i = 0; i < 3; ++i) lin.one_minus_A[i] = 0.0;
    const auto r = optimize_interference(lib, lin, 1);
    CHECK(r.policy.probs[0] == doctest::Approx(1.0));
    CHECK(stable_sum(r.policy.probs) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("KKT certificates on random problems") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    const std::size_t count = 2 + rng() % 15;
    const int memory = 1 + static_cast<int>(rng() % (count - 1));
    const auto lib = make_library(zipf_popularity(count, 3.0 * unit(rng)), uniform_rates(0.2 + 2.0 * unit(rng), count, rng()));
    NetworkParams p;
    p.helper_density = 0.005 + 0.2 * unit(rng);
    p.pathloss_exp = 2.2 + 2.0 * unit(rng);
    const auto rn = optimize_noise(lib, p, memory);
    CHECK(rn.kkt_residual <= 1e-6);
    CHECK(std::abs(stable_sum(rn.policy.probs) - memory) <= 1e-9);
    const auto ri = optimize_interference(lib, interference_constants(lib, p.pathloss_exp, 1.0 + 10.0 * unit(rng)), memory);
    CHECK(ri.kkt_residual <= 1e-6);
    CHECK(std::abs(stable_sum(ri.policy.probs) - memory) <= 1e-9);
  }
}

TEST_CASE("baselines") {
  CHECK(baseline_policy(Baseline::most_popular, 5, 2).probs == std::vector<double>{1, 1, 0, 0, 0});
  for (double v : baseline_policy(Baseline::uniform, 5, 2).probs) CHECK(v == doctest::Approx(0.4));
  CHECK_THROWS_AS(baseline_policy(Baseline::uniform, 2, 2), std::invalid_argument);
}

TEST_CASE("brute force") {
  SUBCASE("constant objective keeps the first vertex") {
    const auto r = brute_force_policy([](const CachingPolicy&) { return 1.0; }, 3, 1, 0.5);
    CHECK(r.policy.probs == std::vector<double>{0, 0, 0});
    // (0..2)^3 points with at most 2 units: 10 feasible points.
    CHECK(r.evaluated == 10);
  }
  SUBCASE("matches the noise optimizer") {
    const auto lib = make_library(zipf_popularity(2, 1.0), {0.8, 1.2});
    const NetworkParams p;
    const auto r = optimize_noise(lib, p, 1);
    const auto b = brute_force_policy([&](const CachingPolicy& c) { return success_noise(lib, p, c); }, 2, 1, 1e-3);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(b.policy.probs[i] - r.policy.probs[i]) <= 1e-3);
  }
  SUBCASE("matches the interference optimizer in the small-rate setting") {
    const auto lib = make_library(zipf_popularity(2, 1.0), constant_rates(0.001, 2));
    const auto ic = interference_constants(lib, 3.0, 2.0);
    const auto r = optimize_interference(lib, ic, 1);
    const auto b = brute_force_policy([&](const CachingPolicy& c) { return rayleigh_lower_bound(lib, ic, c); }, 2, 1, 1e-3);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(b.policy.probs[i] - r.policy.probs[i]) <= 1e-2);
  }
  CHECK_THROWS_AS(brute_force_policy([](const CachingPolicy&) { return 0.0; }, 10, 2, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(brute_force_policy([](const CachingPolicy&) { return 0.0; }, 2, 1, 0.3), std::invalid_argument);
}

TEST_CASE("spread") { CHECK(policy_spread({{0.9, 0.5, 0.1}, 1}) == doctest::Approx(0.8)); }
