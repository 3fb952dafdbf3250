#include "cachegeo/simulator.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "cachegeo/analytics.hpp"

namespace cachegeo {
namespace {

using std::numbers::pi;

// Stream tags keep the substreams of different experiments disjoint.
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;
constexpr std::uint64_t kInterferenceStream = 0x73697200ULL;
constexpr std::uint64_t kXiStream = 0x7869ULL;

// Gains above this quantile are ignored when sizing reach windows.
constexpr double kGainTail = 1e-7;
// Upper tail of the smallest reciprocal gain covered by sample_xi_min.
constexpr double kXiTail = 1e-6;
constexpr double kMaxExpectedPoints = 2e6;
// Automatic interference windows above this expected point count fall back
// to bounding the request mass whose nearest holder lies outside.
constexpr double kAutoWindowPoints = 5e4;
constexpr double kMissMass = 1e-3;
// The window must also hold the serving cell and the users competing for it.
constexpr double kLoadWindowFactor = 2.0;
// Gain tail treated as impossible when associating other users.
constexpr double kNegligible = 1e-20;

double unit(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::size_t draw_content(const std::vector<double>& cumulative, Rng& rng) {
  const double u = unit(rng) * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::vector<double> cumulative_of(const std::vector<double>& f) {
  std::vector<double> c(f.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) c[i] = (acc += f[i]);
  return c;
}

// Gain exceeded with probability kGainTail.
double gain_quantile(double m) { return boost::math::gamma_q_inv(m, kGainTail) / m; }

void check_window(double intensity, double radius, const char* where) {
  if (intensity * pi * radius * radius > kMaxExpectedPoints) {
    throw std::invalid_argument(std::string(where) +
                                ": simulation window holds too many points; set an explicit radius");
  }
}

// Smallest R with sum_i f_i exp(-p_i lambda pi R^2) <= mass over p_i > 0.
double miss_mass_radius(const std::vector<double>& f, const std::vector<double>& p, double density, double mass) {
  const auto missed = [&](double area) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (p[i] > 0.0) m += f[i] * std::exp(-p[i] * density * area);
    }
    return m;
  };
  double lo = 0.0;
  double hi = 1.0 / density;
  while (missed(hi) > mass) hi *= 2.0;
  for (int it = 0; it < 100 && hi - lo > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (missed(mid) > mass ? lo : hi) = mid;
  }
  return std::sqrt(hi / pi);
}

unsigned thread_count(const SimulationOptions& options, std::size_t trials) {
  unsigned n = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(trials, 1)));
}

// Runs body(trial) for every trial. Each trial writes only its own output slot,
// so results do not depend on the split across threads.
template <class Body>
void for_each_trial(std::size_t trials, unsigned threads, Body&& body) {
  if (threads <= 1) {
    for (std::size_t t = 0; t < trials; ++t) body(t);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (trials + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(trials, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] {
      for (std::size_t t = begin; t < end; ++t) body(t);
    });
  }
}

double dist2(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double norm2(const Point& a) { return a.x * a.x + a.y * a.y; }

// Uniform grid over the window, about two helpers per cell.
class HelperGrid {
 public:
  HelperGrid(const std::vector<Point>& points, double radius, double density) : origin_(-radius) {
    const double side = 2.0 * radius;
    n_ = static_cast<int>(std::clamp(std::ceil(side * std::sqrt(density / 2.0)), 1.0, 1024.0));
    cell_ = side / n_;
    cells_.resize(static_cast<std::size_t>(n_) * n_);
    for (std::size_t h = 0; h < points.size(); ++h) {
      cells_[index(coord(points[h].x), coord(points[h].y))].push_back(h);
    }
  }

  // Visits every helper within `reach` of `at` (and possibly some farther
  // ones), nearest rings first. Stops and returns true once visit does.
  template <class Visit>
  bool scan(const Point& at, double reach, Visit&& visit) const {
    const int cx = coord(at.x);
    const int cy = coord(at.y);
    for (int k = 0; k < n_; ++k) {
      if (k >= 1 && (k - 1) * cell_ > reach) break;
      for (int dy = -k; dy <= k; ++dy) {
        const int y = cy + dy;
        if (y < 0 || y >= n_) continue;
        const int step = (dy == -k || dy == k) ? 1 : 2 * k;
        for (int dx = -k; dx <= k; dx += std::max(step, 1)) {
          const int x = cx + dx;
          if (x < 0 || x >= n_) continue;
          for (std::size_t h : cells_[index(x, y)]) {
            if (visit(h)) return true;
          }
        }
      }
    }
    return false;
  }

 private:
  int coord(double v) const { return std::clamp(static_cast<int>(std::floor((v - origin_) / cell_)), 0, n_ - 1); }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * n_ + x; }

  double origin_;
  double cell_ = 1.0;
  int n_ = 1;
  std::vector<std::vector<std::size_t>> cells_;
};

}  // namespace

Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

std::vector<Point> sample_ppp(double intensity, double radius, Rng& rng) {
  if (!(intensity >= 0.0)) throw std::invalid_argument("sample_ppp: intensity must be >= 0");
  if (!(radius > 0.0)) throw std::invalid_argument("sample_ppp: radius must be positive");
  std::vector<Point> points;
  if (intensity == 0.0) return points;
  const double mean = intensity * pi * radius * radius;
  const auto count = std::poisson_distribution<std::size_t>(mean)(rng);
  points.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double r = radius * std::sqrt(unit(rng));
    const double theta = 2.0 * pi * unit(rng);
    points.push_back({r * std::cos(theta), r * std::sin(theta)});
  }
  return points;
}

double nakagami_gain(double m, Rng& rng) {
  if (!(m >= 0.5)) throw std::invalid_argument("nakagami_gain: m must be >= 1/2");
  if (m == 1.0) return std::exponential_distribution<double>(1.0)(rng);
  return std::gamma_distribution<double>(m, 1.0 / m)(rng);
}

double coverage_radius(double helper_density, double p) {
  if (!(helper_density > 0.0) || !(p > 0.0)) {
    throw std::invalid_argument("coverage_radius: density and p must be positive");
  }
  return std::sqrt(std::log(1e3) / (p * helper_density * pi));
}

Realization sample_realization(const ContentLibrary& library, const NetworkParams& params,
                               const BlockLayout& layout, double radius, Rng& rng) {
  Realization net;
  net.radius = radius;
  net.helpers = sample_ppp(params.helper_density, radius, rng);
  net.caches.resize(net.helpers.size());
  for (auto& cache : net.caches) sample_cache_into(layout, unit(rng), cache);

  const auto cumulative = cumulative_of(library.popularity);
  net.typical_request = draw_content(cumulative, rng);
  net.typical_gains.resize(net.helpers.size());
  for (std::size_t h = 0; h < net.helpers.size(); ++h) {
    const bool caches = std::binary_search(net.caches[h].begin(), net.caches[h].end(), net.typical_request);
    net.typical_gains[h] = nakagami_gain(caches ? params.fading_desired : params.fading_interf, rng);
  }

  net.users = sample_ppp(params.user_density, radius, rng);
  net.requested.resize(net.users.size());
  for (auto& j : net.requested) j = draw_content(cumulative, rng);
  return net;
}

std::optional<ReciprocalGain> smallest_reciprocal(const Realization& net, std::size_t content, double alpha) {
  std::optional<ReciprocalGain> best;
  for (std::size_t h = 0; h < net.helpers.size(); ++h) {
    if (!std::binary_search(net.caches[h].begin(), net.caches[h].end(), content)) continue;
    const double xi = std::pow(norm2(net.helpers[h]), alpha / 2.0) / net.typical_gains[h];
    if (!best || xi < best->xi) best = ReciprocalGain{xi, h};
  }
  return best;
}

std::optional<LinkOutcome> evaluate_link(const Realization& net, const NetworkParams& params,
                                         std::size_t content, double target_rate, double load) {
  const auto best = smallest_reciprocal(net, content, params.pathloss_exp);
  if (!best) return std::nullopt;
  LinkOutcome out;
  out.xi_min = best->xi;
  out.serving_helper = best->helper;
  double interference = 0.0;
  for (std::size_t h = 0; h < net.helpers.size(); ++h) {
    if (h == best->helper) continue;
    interference += params.tx_power * net.typical_gains[h] * std::pow(norm2(net.helpers[h]), -params.pathloss_exp / 2.0);
  }
  out.interference = interference;
  out.load = load;
  const double denom = out.xi_min * (params.noise_power + interference);
  const double sinr = denom > 0.0 ? params.tx_power / denom : std::numeric_limits<double>::infinity();
  out.rate = std::log2(1.0 + sinr) / load;
  out.success = out.rate >= target_rate;
  return out;
}

Estimate make_estimate(std::size_t successes, std::size_t trials) {
  Estimate e;
  e.trials = trials;
  e.successes = successes;
  if (trials == 0) return e;
  e.value = static_cast<double>(successes) / static_cast<double>(trials);
  e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(trials));
  return e;
}

Estimate simulate_noise_limited(const ContentLibrary& library, const NetworkParams& params,
                                const CachingPolicy& policy, const SimulationOptions& options) {
  validate_params(params);
  if (options.trials < 1) throw std::invalid_argument("simulate_noise_limited: trials must be >= 1");
  if (!(params.noise_power > 0.0)) throw std::invalid_argument("simulate_noise_limited: noise_power must be positive");
  if (policy.probs.size() != library.count()) throw std::invalid_argument("simulate_noise_limited: size mismatch");
  const BlockLayout layout = build_block_layout(policy);
  const double alpha = params.pathloss_exp;
  const double snr = params.snr();
  const std::size_t count = library.count();

  // Per-content window: beyond it a helper would need a gain above the
  // kGainTail quantile to meet the rate target.
  std::vector<double> threshold(count);
  std::vector<double> radius(count);
  const double g_max = gain_quantile(params.fading_desired);
  for (std::size_t i = 0; i < count; ++i) {
    threshold[i] = snr / std::expm1(library.rates[i] * std::numbers::ln2);
    radius[i] = options.radius > 0.0 ? options.radius : std::pow(threshold[i] * g_max, 1.0 / alpha);
    if (policy.probs[i] > 0.0) check_window(params.helper_density, radius[i], "simulate_noise_limited");
  }
  const auto cumulative = cumulative_of(library.popularity);

  std::vector<unsigned char> success(options.trials, 0);
  for_each_trial(options.trials, thread_count(options, options.trials), [&](std::size_t t) {
    Rng rng = substream(options.seed, kNoiseStream, t);
    const std::size_t i = draw_content(cumulative, rng);
    if (policy.probs[i] == 0.0 || params.helper_density == 0.0) return;
    const double R = radius[i];
    const auto n = std::poisson_distribution<std::size_t>(params.helper_density * pi * R * R)(rng);
    double xi_min = std::numeric_limits<double>::infinity();
    // Only the distance matters without interference, so helpers are drawn radially.
    for (std::size_t k = 0; k < n; ++k) {
      const double r = R * std::sqrt(unit(rng));
      if (!layout.includes(i, unit(rng))) continue;
      xi_min = std::min(xi_min, std::pow(r, alpha) / nakagami_gain(params.fading_desired, rng));
    }
    if (std::isfinite(xi_min) && std::log2(1.0 + snr / xi_min) >= library.rates[i]) success[t] = 1;
  });
  std::size_t hits = 0;
  for (unsigned char s : success) hits += s;
  return make_estimate(hits, options.trials);
}

LoadMode parse_load_mode(std::string_view name) {
  if (name == "instantaneous" || name == "24") return LoadMode::instantaneous;
  if (name == "mean-approx" || name == "29") return LoadMode::mean_approx;
  if (name == "long-term" || name == "long-term-assoc" || name == "50") return LoadMode::long_term;
  throw std::invalid_argument("unknown load mode '" + std::string(name) +
                              "' (expected instantaneous, mean-approx or long-term)");
}

std::string_view to_string(LoadMode mode) {
  switch (mode) {
    case LoadMode::instantaneous: return "instantaneous";
    case LoadMode::mean_approx: return "mean-approx";
    case LoadMode::long_term: return "long-term";
  }
  return "unknown";
}

InterferenceReport simulate_interference(const ContentLibrary& library, const NetworkParams& params,
                                         const CachingPolicy& policy, const SimulationOptions& options) {
  validate_params(params);
  if (options.trials < 1) throw std::invalid_argument("simulate_interference: trials must be >= 1");
  if (policy.probs.size() != library.count()) throw std::invalid_argument("simulate_interference: size mismatch");
  if (!(params.helper_density > 0.0)) throw std::invalid_argument("simulate_interference: helper_density must be positive");
  const BlockLayout layout = build_block_layout(policy);
  const std::size_t count = library.count();
  const double alpha = params.pathloss_exp;

  double radius = options.radius;
  if (radius <= 0.0) {
    double p_min = 1.0;
    for (double p : policy.probs) {
      if (p > 0.0) p_min = std::min(p_min, p);
    }
    radius = kLoadWindowFactor * coverage_radius(params.helper_density, p_min);
    if ((params.helper_density + params.user_density) * pi * radius * radius > kAutoWindowPoints) {
      radius = kLoadWindowFactor * miss_mass_radius(library.popularity, policy.probs, params.helper_density, kMissMass);
    }
  }
  check_window(params.helper_density + params.user_density, radius, "simulate_interference");

  struct Record {
    std::size_t content = 0;
    bool served = false;
    double load_ins = 1.0;
    double load_lt = 1.0;
    double capacity_ins = 0.0;  // log2(1 + SINR) before load sharing
    double capacity_lt = 0.0;
  };
  std::vector<Record> records(options.trials);
  const double gain_cap = boost::math::gamma_q_inv(params.fading_desired, kNegligible) / params.fading_desired;

  for_each_trial(options.trials, thread_count(options, options.trials), [&](std::size_t t) {
    Rng rng = substream(options.seed, kInterferenceStream, t);
    const Realization net = sample_realization(library, params, layout, radius, rng);
    Record& rec = records[t];
    rec.content = net.typical_request;
    const std::size_t i = net.typical_request;
    const std::size_t H = net.helpers.size();

    std::vector<double> path_gain(H);  // r^-alpha to the typical user
    for (std::size_t h = 0; h < H; ++h) path_gain[h] = std::pow(norm2(net.helpers[h]), -alpha / 2.0);

    const auto best = smallest_reciprocal(net, i, alpha);
    if (!best) return;
    rec.served = true;
    const std::size_t s_ins = best->helper;
    std::size_t s_lt = H;
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < H; ++h) {
      if (!std::binary_search(net.caches[h].begin(), net.caches[h].end(), i)) continue;
      const double d = norm2(net.helpers[h]);
      if (d < nearest) {
        nearest = d;
        s_lt = h;
      }
    }

    double total_rx = 0.0;
    for (std::size_t h = 0; h < H; ++h) total_rx += params.tx_power * net.typical_gains[h] * path_gain[h];
    const auto capacity = [&](std::size_t serving) {
      const double signal = params.tx_power * net.typical_gains[serving] * path_gain[serving];
      const double noise = params.noise_power + std::max(total_rx - signal, 0.0);
      return noise > 0.0 ? std::log2(1.0 + signal / noise) : std::numeric_limits<double>::infinity();
    };
    rec.capacity_ins = capacity(s_ins);
    rec.capacity_lt = capacity(s_lt);

    // Other users are associated lazily: a user joins s_ins only if no other
    // holder of its request beats the gain of s_ins, and joins s_lt only if no
    // holder lies closer. Holders whose required gain exceeds gain_cap are
    // never checked.
    const HelperGrid grid(net.helpers, radius, params.helper_density);
    const auto holds = [&](std::size_t h, std::size_t j) {
      return std::binary_search(net.caches[h].begin(), net.caches[h].end(), j);
    };
    const auto& cache_ins = net.caches[s_ins];
    const auto& cache_lt = net.caches[s_lt];
    for (std::size_t u = 0; u < net.users.size(); ++u) {
      const std::size_t j = net.requested[u];
      const Point& at = net.users[u];
      if (std::binary_search(cache_ins.begin(), cache_ins.end(), j)) {
        const double t = nakagami_gain(params.fading_desired, rng) * std::pow(dist2(at, net.helpers[s_ins]), -alpha / 2.0);
        const double reach = std::pow(gain_cap / t, 1.0 / alpha);
        const bool beaten = grid.scan(at, reach, [&](std::size_t h) {
          if (h == s_ins || !holds(h, j)) return false;
          const double d2 = dist2(at, net.helpers[h]);
          if (d2 > reach * reach) return false;
          return nakagami_gain(params.fading_desired, rng) * std::pow(d2, -alpha / 2.0) > t;
        });
        if (!beaten) rec.load_ins += 1.0;
      }
      if (std::binary_search(cache_lt.begin(), cache_lt.end(), j)) {
        const double d_lt = dist2(at, net.helpers[s_lt]);
        const bool closer = grid.scan(at, std::sqrt(d_lt), [&](std::size_t h) {
          return h != s_lt && holds(h, j) && dist2(at, net.helpers[h]) < d_lt;
        });
        if (!closer) rec.load_lt += 1.0;
      }
    }
  });

  InterferenceReport report;
  report.radius = radius;
  report.mean_load_instantaneous.assign(count, 0.0);
  report.mean_load_long_term.assign(count, 0.0);
  report.served_trials.assign(count, 0);
  for (const Record& rec : records) {
    if (!rec.served) continue;
    report.served_trials[rec.content] += 1;
    report.mean_load_instantaneous[rec.content] += rec.load_ins;
    report.mean_load_long_term[rec.content] += rec.load_lt;
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (report.served_trials[i] == 0) continue;
    report.mean_load_instantaneous[i] /= static_cast<double>(report.served_trials[i]);
    report.mean_load_long_term[i] /= static_cast<double>(report.served_trials[i]);
  }

  std::size_t hit_ins = 0;
  std::size_t hit_mean = 0;
  std::size_t hit_lt = 0;
  for (const Record& rec : records) {
    if (!rec.served) continue;
    const double rho = library.rates[rec.content];
    hit_ins += rec.capacity_ins / rec.load_ins >= rho;
    hit_mean += rec.capacity_ins / report.mean_load_instantaneous[rec.content] >= rho;
    hit_lt += rec.capacity_lt / report.mean_load_long_term[rec.content] >= rho;
  }
  report.instantaneous = make_estimate(hit_ins, options.trials);
  report.mean_approx = make_estimate(hit_mean, options.trials);
  report.long_term = make_estimate(hit_lt, options.trials);
  return report;
}

Estimate simulate_interference_limited(const ContentLibrary& library, const NetworkParams& params,
                                       const CachingPolicy& policy, const SimulationOptions& options,
                                       LoadMode mode) {
  const InterferenceReport report = simulate_interference(library, params, policy, options);
  switch (mode) {
    case LoadMode::instantaneous: return report.instantaneous;
    case LoadMode::mean_approx: return report.mean_approx;
    case LoadMode::long_term: return report.long_term;
  }
  throw std::invalid_argument("simulate_interference_limited: unknown load mode");
}

std::vector<double> sample_xi_min(const NetworkParams& params, double p, std::size_t samples,
                                  std::uint64_t seed, double radius) {
  validate_params(params);
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_xi_min: p must lie in [0,1]");
  std::vector<double> out(samples, std::numeric_limits<double>::infinity());
  if (p == 0.0 || params.helper_density == 0.0) return out;
  const double alpha = params.pathloss_exp;
  if (radius <= 0.0) {
    // Cover the CDF up to its 1 - kXiTail quantile.
    const double xi_hi = std::pow(-std::log(kXiTail) / (kappa(params) * p), 1.0 / params.delta());
    radius = std::pow(xi_hi * gain_quantile(params.fading_desired), 1.0 / alpha);
  }
  check_window(params.helper_density, radius, "sample_xi_min");
  const double mean = params.helper_density * pi * radius * radius;
  for (std::size_t t = 0; t < samples; ++t) {
    Rng rng = substream(seed, kXiStream, t);
    const auto n = std::poisson_distribution<std::size_t>(mean)(rng);
    for (std::size_t k = 0; k < n; ++k) {
      const double r = radius * std::sqrt(unit(rng));
      if (p < 1.0 && unit(rng) >= p) continue;
      out[t] = std::min(out[t], std::pow(r, alpha) / nakagami_gain(params.fading_desired, rng));
    }
  }
  return out;
}

}  // namespace cachegeo
