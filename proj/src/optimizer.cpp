#include "cachegeo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cachegeo {
namespace {

// One concave-separable placement problem: per-content candidate, bounds,
// and gradient of the maximized objective term.
struct Problem {
  std::vector<double> l;
  std::vector<double> u;
  std::vector<double> log_l;  // log of l, finite even when l underflows
  std::function<double(std::size_t, double)> candidate;  // (i, log(omega + mu_i)) -> p_i, unclamped
  std::function<double(std::size_t, double)> gradient;   // (i, p_i) -> d/dp of f_i g_i(p_i)
  std::vector<bool> active;                              // f_i > 0
};

double clamp_unit(double p) { return std::clamp(p, 0.0, 1.0); }

std::vector<double> probs_at(const Problem& pb, double log_omega) {
  std::vector<double> p(pb.l.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!pb.active[i]) continue;
    // mu_i > 0 forces p_i = 1; the candidate there is exact only up to rounding.
    p[i] = log_omega <= pb.log_l[i] ? 1.0 : clamp_unit(pb.candidate(i, log_omega));
  }
  return p;
}

double kkt_residual(const Problem& pb, const std::vector<double>& p, double omega,
                    const std::vector<double>& mu, int memory) {
  double worst = 0.0;
  const double total = stable_sum(p);
  worst = std::max(worst, std::abs(omega * (total - memory)));
  worst = std::max(worst, std::max(total - memory, 0.0));
  worst = std::max(worst, std::max(-omega, 0.0));
  for (std::size_t i = 0; i < p.size(); ++i) {
    worst = std::max(worst, std::max(-mu[i], 0.0));
    worst = std::max(worst, std::abs(mu[i] * (p[i] - 1.0)));
    const double slack = -pb.gradient(i, p[i]) + omega + mu[i];
    if (p[i] > 0.0) {
      worst = std::max(worst, std::abs(slack));
    } else {
      worst = std::max(worst, std::max(-slack, 0.0));  // dual feasibility at p = 0
    }
  }
  return worst;
}

SolveReport solve(const Problem& pb, int memory, const SolveOptions& options, const char* name) {
  const std::size_t count = pb.l.size();
  if (memory < 1 || static_cast<std::size_t>(memory) >= count) {
    throw std::invalid_argument(std::string(name) + ": requires 1 <= M < F");
  }
  if (!(options.tolerance > 0.0)) throw std::invalid_argument(std::string(name) + ": tolerance must be positive");

  SolveReport report;
  report.policy.memory = memory;
  std::size_t positive = 0;
  for (bool a : pb.active) positive += a ? 1 : 0;

  double omega = 0.0;
  if (positive <= static_cast<std::size_t>(memory)) {
    // Budget cannot bind: cache every requested content fully.
    report.policy.probs.assign(count, 0.0);
    for (std::size_t i = 0; i < count; ++i) report.policy.probs[i] = pb.active[i] ? 1.0 : 0.0;
  } else {
    // Bisection runs on log(omega): the lower bounds can underflow for large kappa T.
    double a = std::numeric_limits<double>::infinity();
    double b = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i) {
      if (!pb.active[i]) continue;
      a = std::min(a, pb.log_l[i]);
      b = std::max(b, std::log(pb.u[i]));
    }
    double x = 0.5 * (a + b);
    std::vector<double> p = probs_at(pb, x);
    double total = stable_sum(p);
    int it = 0;
    while (std::abs(total - memory) >= options.tolerance) {
      if (++it > options.max_iterations || !(b > a) || x <= a || x >= b) break;
      (total > memory ? a : b) = x;
      x = 0.5 * (a + b);
      p = probs_at(pb, x);
      total = stable_sum(p);
    }
    report.iterations = it;
    omega = std::exp(x);
    double sa = total, sb = total;
    const auto spread_gap = [&] {
      // Spread the remaining budget gap over the interior coordinates.
      for (int round = 0; round < 8; ++round) {
        const double gap = memory - total;
        std::size_t interior = 0;
        for (double v : p) interior += v > 0.0 && v < 1.0;
        if (gap == 0.0 || interior == 0) break;
        const double share = gap / static_cast<double>(interior);
        for (double& v : p) {
          if (v > 0.0 && v < 1.0) v = std::clamp(v + share, 0.0, 1.0);
        }
        total = stable_sum(p);
      }
    };
    if (std::abs(total - memory) >= options.tolerance && b - a <= 1e-12 * std::max(1.0, std::abs(b))) {
      // Collapsed bracket around a jump of sum p (nearly linear objective
      // terms): any convex combination of the two sides is optimal here.
      const std::vector<double> pa = probs_at(pb, a);
      const std::vector<double> pbv = probs_at(pb, b);
      sa = stable_sum(pa);
      sb = stable_sum(pbv);
      if (sa > memory && sb < memory) {
        const double t = (memory - sb) / (sa - sb);
        for (std::size_t i = 0; i < count; ++i) p[i] = pbv[i] + t * (pa[i] - pbv[i]);
      } else {
        p = std::abs(sa - memory) < std::abs(sb - memory) ? pa : pbv;
      }
      total = stable_sum(p);
    }
    spread_gap();
    if (std::abs(total - memory) >= options.tolerance) {
      std::ostringstream os;
      os.precision(17);
      os << name << ": bisection did not converge after " << it << " iterations; log-omega bracket [" << a << ", "
         << b << "], omega " << omega << ", sum p " << total << " (bracket sums " << sa << ", " << sb << "), M "
         << memory;
      throw NumericFailure(os.str());
    }
    report.policy.probs = std::move(p);
  }

  report.omega = omega;
  report.mu.assign(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    if (!pb.active[i]) continue;
    // With omega = 0 the fully cached contents absorb their whole gradient.
    report.mu[i] = omega > 0.0 ? std::max(pb.l[i] - omega, 0.0)
                               : (report.policy.probs[i] >= 1.0 ? pb.gradient(i, 1.0) : 0.0);
  }
  report.kkt_residual = kkt_residual(pb, report.policy.probs, report.omega, report.mu, memory);
  return report;
}

}  // namespace

double noise_candidate(double omega, double mu, double f, double kappa, double T) {
  if (!(omega + mu > 0.0)) throw std::invalid_argument("noise_candidate: omega + mu must be positive");
  const double kt = kappa * T;
  return std::max((std::log(f * kt) - std::log(omega + mu)) / kt, 0.0);
}

std::pair<double, double> noise_multiplier_bounds(double f, double kappa, double T) {
  const double kt = kappa * T;
  return {f * kt * std::exp(-kt), f * kt};
}

SolveReport optimize_noise(const ContentLibrary& library, const NetworkParams& params, int memory,
                           SolveOptions options) {
  const NoiseConstants nc = noise_constants(library, params);
  const std::size_t count = library.count();
  Problem pb;
  pb.active.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto [l, u] = noise_multiplier_bounds(library.popularity[i], nc.kappa, nc.T[i]);
    pb.l.push_back(l);
    pb.u.push_back(u);
    pb.log_l.push_back(std::log(u) - nc.kappa * nc.T[i]);
    pb.active[i] = library.popularity[i] > 0.0;
  }
  pb.candidate = [&](std::size_t i, double log_w) {
    const double kt = nc.kappa * nc.T[i];
    return std::max((std::log(library.popularity[i] * kt) - log_w) / kt, 0.0);
  };
  pb.gradient = [&](std::size_t i, double p) {
    const double kt = nc.kappa * nc.T[i];
    return library.popularity[i] * kt * std::exp(-kt * p);
  };
  SolveReport report = solve(pb, memory, options, "optimize_noise");
  report.objective = success_noise(library, params, report.policy);
  return report;
}

double interference_candidate(double omega, double mu, double f, double one_minus_A, double B) {
  if (!(omega + mu > 0.0)) throw std::invalid_argument("interference_candidate: omega + mu must be positive");
  const double root = std::sqrt(f * B / (omega + mu));
  if (one_minus_A <= 1e-14 * B) {
    // Linear term f p / B: all or nothing around omega + mu = f / B.
    return root >= B ? 1.0 : 0.0;
  }
  return std::max(-B + root, 0.0) / one_minus_A;
}

std::pair<double, double> interference_multiplier_bounds(double f, double one_minus_A, double B) {
  const double d = one_minus_A + B;
  return {f * B / (d * d), f / B};
}

SolveReport optimize_interference(const ContentLibrary& library, const InterferenceConstants& consts,
                                  int memory, SolveOptions options) {
  const std::size_t count = library.count();
  if (consts.B.size() != count) throw std::invalid_argument("optimize_interference: constants do not match library");
  Problem pb;
  pb.active.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto [l, u] = interference_multiplier_bounds(library.popularity[i], consts.one_minus_A[i], consts.B[i]);
    pb.l.push_back(l);
    pb.u.push_back(u);
    pb.log_l.push_back(std::log(l));
    pb.active[i] = library.popularity[i] > 0.0;
  }
  pb.candidate = [&](std::size_t i, double log_w) {
    return interference_candidate(std::exp(log_w), 0.0, library.popularity[i], consts.one_minus_A[i], consts.B[i]);
  };
  pb.gradient = [&](std::size_t i, double p) {
    const double d = consts.one_minus_A[i] * p + consts.B[i];
    return library.popularity[i] * consts.B[i] / (d * d);
  };
  SolveReport report = solve(pb, memory, options, "optimize_interference");
  report.objective = rayleigh_lower_bound(library, consts, report.policy);
  return report;
}

CachingPolicy baseline_policy(Baseline kind, std::size_t count, int memory) {
  if (memory < 1 || static_cast<std::size_t>(memory) >= count) {
    throw std::invalid_argument("baseline_policy: requires 1 <= M < F");
  }
  CachingPolicy policy{std::vector<double>(count, 0.0), memory};
  if (kind == Baseline::most_popular) {
    std::fill_n(policy.probs.begin(), memory, 1.0);
  } else {
    std::fill(policy.probs.begin(), policy.probs.end(), static_cast<double>(memory) / static_cast<double>(count));
  }
  return policy;
}

BruteForceResult brute_force_policy(const std::function<double(const CachingPolicy&)>& objective,
                                    std::size_t count, int memory, double grid_step) {
  if (count == 0) throw std::invalid_argument("brute_force_policy: empty library");
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw std::invalid_argument("brute_force_policy: step must be in (0,1]");
  const long levels = std::lround(1.0 / grid_step);
  if (std::abs(levels * grid_step - 1.0) > 1e-9) {
    throw std::invalid_argument("brute_force_policy: 1/step must be an integer");
  }
  if (std::pow(static_cast<double>(levels + 1), static_cast<double>(count)) > kBruteForceLimit) {
    throw std::invalid_argument("brute_force_policy: search space too large");
  }
  const long budget = static_cast<long>(memory) * levels;

  BruteForceResult best;
  best.value = -std::numeric_limits<double>::infinity();
  CachingPolicy current{std::vector<double>(count, 0.0), memory};
  std::vector<long> units(count, 0);

  // Odometer over the grid in lexicographic order, skipping points over budget.
  long used = 0;
  while (true) {
    if (used <= budget) {
      const double v = objective(current);
      ++best.evaluated;
      if (v > best.value) {
        best.value = v;
        best.policy = current;
      }
    }
    std::size_t pos = count;
    while (pos-- > 0) {
      if (units[pos] < levels && used < budget) {
        ++units[pos];
        ++used;
        current.probs[pos] = static_cast<double>(units[pos]) / static_cast<double>(levels);
        break;
      }
      used -= units[pos];
      units[pos] = 0;
      current.probs[pos] = 0.0;
      if (pos == 0) return best;
    }
  }
}

double policy_spread(const CachingPolicy& policy) {
  const auto [lo, hi] = std::minmax_element(policy.probs.begin(), policy.probs.end());
  return *hi - *lo;
}

}  // namespace cachegeo
