#ifndef CBS_HARNESS_HPP
#define CBS_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "cbs/bounds.hpp"
#include "cbs/error.hpp"
#include "cbs/signal_model.hpp"
#include "cbs/strategies.hpp"

namespace cbs {

enum class StrategyId : int { Cbs = 0, Omp = 1, TwoStage = 2 };

inline std::string_view strategy_name(StrategyId id) {
  switch (id) {
    case StrategyId::Cbs: return "cbs";
    case StrategyId::Omp: return "omp";
    case StrategyId::TwoStage: return "two_stage";
  }
  return "unknown";
}

inline std::optional<StrategyId> parse_strategy(std::string_view name) {
  if (name == "cbs") return StrategyId::Cbs;
  if (name == "omp") return StrategyId::Omp;
  if (name == "two_stage") return StrategyId::TwoStage;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Seeds
// ---------------------------------------------------------------------------

/// SplitMix64 step: add the golden-ratio increment, then apply the
/// variant-13 avalanche finalizer.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// h = splitmix64(master); then h = splitmix64(h ^ w) for w in
/// (strategy_id, mu_index, trial_index), in that order.
inline constexpr std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t strategy_id,
                                                 std::uint64_t mu_index, std::uint64_t trial_index) noexcept {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ strategy_id);
  h = splitmix64(h ^ mu_index);
  return splitmix64(h ^ trial_index);
}

// Sub-stream tags used inside one trial.
inline constexpr std::uint64_t kPlantStream = 1;
inline constexpr std::uint64_t kNoiseStream = 2;
inline constexpr std::uint64_t kDesignStream = 3;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::size_t n = 4096;
  std::size_t m = 256;
  std::vector<double> mu_grid;
  std::size_t trials = 10000;
  std::vector<StrategyId> strategies{StrategyId::Cbs, StrategyId::Omp};
  std::uint64_t master_seed = 42;
  double noise_sd = 1.0;
  double confidence_level = 0.95;
  double locate_fraction = 0.5;
  /// Worker threads; 0 picks std::thread::hardware_concurrency(). Never
  /// affects results.
  std::size_t workers = 0;
};

inline void validate_config(const ExperimentConfig& config) {
  if (!is_dyadic(config.n))
    throw Error(ErrorCode::DimensionNotDyadic, "dimension must be a power of 2");
  if (config.m < minimum_budget(config.n))
    throw Error(ErrorCode::BudgetTooSmall, "budget below 2·log2(n) = " + std::to_string(minimum_budget(config.n)));
  if (config.mu_grid.empty()) throw Error(ErrorCode::InvalidConfig, "mu grid is empty");
  for (std::size_t i = 0; i < config.mu_grid.size(); ++i) {
    const double mu = config.mu_grid[i];
    if (!std::isfinite(mu) || mu < 0.0) throw Error(ErrorCode::InvalidConfig, "mu values must be finite and >= 0");
    if (i > 0 && !(mu > config.mu_grid[i - 1]))
      throw Error(ErrorCode::InvalidConfig, "mu grid must be strictly increasing");
  }
  if (config.trials < 1) throw Error(ErrorCode::InvalidConfig, "trials must be at least 1");
  if (config.strategies.empty()) throw Error(ErrorCode::InvalidConfig, "no strategies selected");
  if (!(config.noise_sd >= 0.0) || !std::isfinite(config.noise_sd))
    throw Error(ErrorCode::NegativeNoise, "noise standard deviation must be finite and >= 0");
  if (!(config.confidence_level > 0.0 && config.confidence_level < 1.0))
    throw Error(ErrorCode::InvalidConfig, "confidence level must lie in (0, 1)");
  if (std::find(config.strategies.begin(), config.strategies.end(), StrategyId::TwoStage) != config.strategies.end())
    two_stage_split(config.n, config.m, config.locate_fraction);
}

// ---------------------------------------------------------------------------
// Single trial
// ---------------------------------------------------------------------------

struct TrialResult {
  bool success = false;
  std::size_t planted_index = 0;
  std::size_t estimated_index = 0;
};

/// Plants the nonzero uniformly at random, measures through a fresh oracle
/// and checks the strategy's located index. mu = 0 runs against x = 0 with
/// the planted index still drawn, so success then has probability 1/n.
inline TrialResult run_trial(std::size_t n, std::size_t m, double mu, StrategyId strategy, std::uint64_t trial_seed,
                             double noise_sd, double locate_fraction = 0.5) {
  const std::size_t planted = static_cast<std::size_t>(splitmix64(trial_seed ^ kPlantStream) & (n - 1));
  dyadic_depth(n);
  const std::uint64_t noise_seed = splitmix64(trial_seed ^ kNoiseStream);
  MeasurementOracle oracle = mu > 0.0 ? MeasurementOracle(make_signal(n, planted, mu), m, noise_sd, noise_seed)
                                      : MeasurementOracle::zero_signal(n, m, noise_sd, noise_seed);

  std::size_t estimate = 0;
  switch (strategy) {
    case StrategyId::Cbs:
      estimate = cbs_locate(oracle, n, m).estimated_index;
      break;
    case StrategyId::Omp: {
      const RademacherMatrix design = build_rademacher_matrix(n, m, splitmix64(trial_seed ^ kDesignStream));
      estimate = omp_locate(oracle, design).estimated_index;
      break;
    }
    case StrategyId::TwoStage:
      estimate = two_stage_estimate(oracle, n, m, locate_fraction).index;
      break;
  }
  return {estimate == planted, planted, estimate};
}

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion errors / trials.
inline Interval wilson_interval(std::size_t errors, std::size_t trials, double level) {
  if (trials < 1 || errors > trials || !(level > 0.0 && level < 1.0))
    throw Error(ErrorCode::InvalidConfig, "wilson interval needs 0 <= errors <= trials, trials >= 1, level in (0,1)");
  const boost::math::normal standard;
  const double z = boost::math::quantile(standard, 0.5 + level / 2.0);
  const double t = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / t;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / t;
  const double center = (p + z2 / (2.0 * t)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / t + z2 / (4.0 * t * t)) / denom;
  Interval ci{std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
  if (errors == 0) ci.lo = 0.0;
  if (errors == trials) ci.hi = 1.0;
  return ci;
}

struct CurvePoint {
  double mu = 0.0;
  std::size_t trials = 0;
  std::size_t errors = 0;
  double p_err = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double bound_upper = 0.0; // capped binary-search error bound
  double bound_lower = 0.0; // left/right testing lower bound
};

struct ErrorCurve {
  StrategyId strategy = StrategyId::Cbs;
  std::vector<CurvePoint> points;
};

/// Monte Carlo error-probability curves. Every trial seed is derived from
/// (master seed, strategy, mu index, trial index) before dispatch and each
/// outcome lands in its own slot, so the result does not depend on the
/// number of workers or on scheduling.
inline std::vector<ErrorCurve> run_curve(const ExperimentConfig& config) {
  validate_config(config);

  std::vector<StrategyId> strategies = config.strategies;
  std::sort(strategies.begin(), strategies.end());
  strategies.erase(std::unique(strategies.begin(), strategies.end()), strategies.end());

  struct Point {
    StrategyId strategy;
    std::size_t mu_index;
  };
  std::vector<Point> points;
  for (StrategyId s : strategies)
    for (std::size_t k = 0; k < config.mu_grid.size(); ++k) points.push_back({s, k});

  constexpr std::size_t kBlock = 128;
  const std::size_t blocks_per_point = (config.trials + kBlock - 1) / kBlock;
  const std::size_t total_blocks = blocks_per_point * points.size();
  std::vector<std::vector<std::uint8_t>> failed(points.size(), std::vector<std::uint8_t>(config.trials, 0));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex error_mutex;
  std::optional<std::pair<std::size_t, std::string>> first_error;

  auto work = [&] {
    for (;;) {
      const std::size_t block = next.fetch_add(1, std::memory_order_relaxed);
      if (block >= total_blocks || abort.load(std::memory_order_relaxed)) return;
      const std::size_t p = block / blocks_per_point;
      const std::size_t begin = (block % blocks_per_point) * kBlock;
      const std::size_t end = std::min(config.trials, begin + kBlock);
      const Point& point = points[p];
      const double mu = config.mu_grid[point.mu_index];
      for (std::size_t t = begin; t < end; ++t) {
        const std::uint64_t seed = derive_trial_seed(config.master_seed, static_cast<std::uint64_t>(point.strategy),
                                                     point.mu_index, t);
        try {
          const TrialResult r =
              run_trial(config.n, config.m, mu, point.strategy, seed, config.noise_sd, config.locate_fraction);
          failed[p][t] = r.success ? 0 : 1;
        } catch (const std::exception& e) {
          std::lock_guard lock(error_mutex);
          const std::size_t order = p * config.trials + t;
          if (!first_error || order < first_error->first)
            first_error.emplace(order, std::string(strategy_name(point.strategy)) + " trial " + std::to_string(t) +
                                           " at mu=" + std::to_string(mu) + " failed: " + e.what());
          abort.store(true, std::memory_order_relaxed);
          return;
        }
      }
    }
  };

  std::size_t workers = config.workers != 0 ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, total_blocks);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (first_error) throw Error(ErrorCode::TrialFailed, first_error->second);

  std::vector<ErrorCurve> curves;
  for (StrategyId s : strategies) curves.push_back({s, {}});
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double mu = config.mu_grid[points[p].mu_index];
    std::size_t errors = 0;
    for (std::uint8_t f : failed[p]) errors += f;
    const Interval ci = wilson_interval(errors, config.trials, config.confidence_level);
    auto& curve = *std::find_if(curves.begin(), curves.end(),
                                [&](const ErrorCurve& c) { return c.strategy == points[p].strategy; });
    curve.points.push_back({mu, config.trials, errors, static_cast<double>(errors) / static_cast<double>(config.trials),
                            ci.lo, ci.hi, cbs_error_bound_capped(config.n, config.m, mu),
                            testing_lower_bound(config.n, config.m, mu)});
  }
  return curves;
}

// ---------------------------------------------------------------------------
// Distributional checks
// ---------------------------------------------------------------------------

struct StageStatsReport {
  std::size_t samples = 0;
  std::size_t stage_measurements = 0;
  double empirical_mean = 0.0;
  double empirical_variance = 0.0;
  double theory_mean = 0.0;
  double theory_variance = 0.0;
  double mean_z = 0.0;
  double variance_z = 0.0;
  double flip_rate = 0.0;
  double theory_flip_rate = 0.0;
};

/// Samples the stage-s decision statistic with the nonzero planted at index
/// 0 and the search on the true path (interval [0, 2^{s0-s+1})). Under
/// unit noise it is N(2^{(s-1)/2} m_s mu / sqrt n, m_s).
inline StageStatsReport verify_stage_stats(std::size_t n, std::size_t m, std::size_t s, double mu, std::size_t samples,
                                           std::uint64_t seed) {
  if (samples < 2) throw Error(ErrorCode::InvalidConfig, "need at least two samples");
  if (!(mu >= 0.0)) throw Error(ErrorCode::NonpositiveAmplitude, "mu must be >= 0");
  const StageAllocation alloc = stage_allocation(n, m);
  if (s < 1 || s > alloc.stages()) throw Error(ErrorCode::InvalidInterval, "stage outside [1, log2 n]");
  const std::size_t m_s = alloc.counts[s - 1];

  const std::size_t budget = samples * m_s;
  MeasurementOracle oracle = mu > 0.0 ? MeasurementOracle(make_signal(n, 0, mu), budget, 1.0, seed)
                                      : MeasurementOracle::zero_signal(n, budget, 1.0, seed);
  const SparseQuery u = bisection_vector(n, s, 0);

  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t flips = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    double w = 0.0;
    for (std::size_t i = 0; i < m_s; ++i) w += oracle.measure(u);
    sum += w;
    sum_sq += w * w;
    if (!(w > 0.0)) ++flips;
  }

  StageStatsReport r;
  const double count = static_cast<double>(samples);
  r.samples = samples;
  r.stage_measurements = m_s;
  r.empirical_mean = sum / count;
  r.empirical_variance = (sum_sq - count * r.empirical_mean * r.empirical_mean) / (count - 1.0);
  r.theory_mean = std::exp2((static_cast<double>(s) - 1.0) / 2.0) * static_cast<double>(m_s) * mu /
                  std::sqrt(static_cast<double>(n));
  r.theory_variance = static_cast<double>(m_s);
  r.mean_z = (r.empirical_mean - r.theory_mean) / std::sqrt(r.theory_variance / count);
  r.variance_z = (r.empirical_variance - r.theory_variance) / (r.theory_variance * std::sqrt(2.0 / (count - 1.0)));
  r.flip_rate = static_cast<double>(flips) / count;
  r.theory_flip_rate = stage_flip_probability(n, m_s, s, mu);
  return r;
}

struct TwoStageReport {
  std::size_t trials = 0;
  std::size_t location_errors = 0;
  double mean_normalized_squared_error = 0.0; // (1/n) mean ||x_hat - x||^2
};

/// Monte Carlo risk of the locate-then-estimate procedure with a uniformly
/// planted support.
inline TwoStageReport run_two_stage_mse(std::size_t n, std::size_t m, double mu, double locate_fraction,
                                        std::size_t trials, std::uint64_t master_seed, double noise_sd = 1.0) {
  if (trials < 1) throw Error(ErrorCode::InvalidConfig, "trials must be at least 1");
  TwoStageReport report{trials, 0, 0.0};
  double total = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t seed = derive_trial_seed(master_seed, static_cast<std::uint64_t>(StrategyId::TwoStage), 0, t);
    const std::size_t planted = static_cast<std::size_t>(splitmix64(seed ^ kPlantStream) & (n - 1));
    const SignalSpec truth = make_signal(n, planted, mu);
    MeasurementOracle oracle(truth, m, noise_sd, splitmix64(seed ^ kNoiseStream));
    const SparseEstimate est = two_stage_estimate(oracle, n, m, locate_fraction);
    if (est.index != planted) ++report.location_errors;
    total += squared_error(est, truth);
  }
  report.mean_normalized_squared_error = total / static_cast<double>(trials) / static_cast<double>(n);
  return report;
}

} // namespace cbs

#endif // CBS_HARNESS_HPP
