#ifndef CBS_SIGNAL_MODEL_HPP
#define CBS_SIGNAL_MODEL_HPP

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cbs/error.hpp"

namespace cbs {

/// Slack on the unit-norm constraint for query vectors.
inline constexpr double kNormTolerance = 1e-9;

inline bool is_dyadic(std::size_t n) { return n >= 2 && std::has_single_bit(n); }

/// log2(n) for a power of two n.
inline std::size_t dyadic_depth(std::size_t n) {
  if (!is_dyadic(n))
    throw Error(ErrorCode::DimensionNotDyadic,
                "dimension must be a power of 2 (got " + std::to_string(n) + ")");
  return static_cast<std::size_t>(std::countr_zero(n));
}

/// Hidden ground truth: a length-n vector whose only nonzero entry is
/// `amplitude` at `support_index` (0-based).
struct SignalSpec {
  std::size_t n = 0;
  std::size_t support_index = 0;
  double amplitude = 0.0;

  friend bool operator==(const SignalSpec&, const SignalSpec&) = default;
};

inline SignalSpec make_signal(std::size_t n, std::size_t j, double mu) {
  if (!is_dyadic(n))
    throw Error(ErrorCode::DimensionNotDyadic,
                "dimension must be a power of 2 (got " + std::to_string(n) + ")");
  if (j >= n)
    throw Error(ErrorCode::IndexOutOfRange,
                "support index " + std::to_string(j) + " outside [0, " + std::to_string(n) + ")");
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw Error(ErrorCode::NonpositiveAmplitude, "amplitude must be a finite positive number");
  return SignalSpec{n, j, mu};
}

/// A run of `length` consecutive entries starting at `start`, all equal to `value`.
struct Segment {
  std::size_t start = 0;
  std::size_t length = 0;
  double value = 0.0;
};

/// Piecewise-constant query stored as disjoint, ascending segments; every
/// entry not covered by a segment is zero.
class SparseQuery {
public:
  SparseQuery() = default;

  SparseQuery(std::size_t n, std::vector<Segment> segments)
      : n_(n), segments_(std::move(segments)) {
    std::size_t next_free = 0;
    for (const auto& seg : segments_) {
      if (seg.start < next_free || seg.start + seg.length > n_)
        throw Error(ErrorCode::InvalidInterval, "query segments must be disjoint, ascending and inside [0, n)");
      next_free = seg.start + seg.length;
    }
  }

  std::size_t dimension() const noexcept { return n_; }
  std::span<const Segment> segments() const noexcept { return segments_; }

  double entry(std::size_t i) const noexcept {
    for (const auto& seg : segments_)
      if (i >= seg.start && i < seg.start + seg.length) return seg.value;
    return 0.0;
  }

  double squared_norm() const noexcept {
    double acc = 0.0;
    for (const auto& seg : segments_) acc += static_cast<double>(seg.length) * seg.value * seg.value;
    return acc;
  }

  double norm() const noexcept { return std::sqrt(squared_norm()); }

  double dot(std::span<const double> x) const {
    if (x.size() != n_) throw Error(ErrorCode::DimensionMismatch, "signal length differs from query dimension");
    double acc = 0.0;
    for (const auto& seg : segments_) {
      double partial = 0.0;
      for (std::size_t i = seg.start; i < seg.start + seg.length; ++i) partial += x[i];
      acc += seg.value * partial;
    }
    return acc;
  }

  std::vector<double> to_dense() const {
    std::vector<double> out(n_, 0.0);
    for (const auto& seg : segments_)
      for (std::size_t i = seg.start; i < seg.start + seg.length; ++i) out[i] = seg.value;
    return out;
  }

private:
  std::size_t n_ = 0;
  std::vector<Segment> segments_;
};

using DenseQuery = std::vector<double>;
using QueryVector = std::variant<DenseQuery, SparseQuery>;

inline double euclidean_norm(std::span<const double> a) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= a.size(); i += 4)
    for (std::size_t k = 0; k < 4; ++k) acc[k] += a[i + k] * a[i + k];
  for (; i < a.size(); ++i) acc[0] += a[i] * a[i];
  return std::sqrt((acc[0] + acc[1]) + (acc[2] + acc[3]));
}

struct Observation {
  std::size_t index = 0;
  double value = 0.0;
};

/// Budgeted noisy query channel y = <a, x> + sigma * z. The only way a
/// strategy learns anything about the hidden signal.
///
/// Noise is drawn with std::normal_distribution over std::mt19937_64 seeded
/// directly with the user seed; streams are reproducible within one
/// standard library implementation. One oracle must not be shared between
/// threads.
class MeasurementOracle {
public:
  MeasurementOracle(const SignalSpec& spec, std::size_t budget, double noise_sd, std::uint64_t seed,
                    bool capture_queries = false)
      : MeasurementOracle(make_signal(spec.n, spec.support_index, spec.amplitude).n, spec.support_index,
                          spec.amplitude, budget, noise_sd, seed, capture_queries) {}

  /// x = 0 in dimension n. Test hook for the mu -> 0 limit, which a
  /// SignalSpec cannot represent.
  static MeasurementOracle zero_signal(std::size_t n, std::size_t budget, double noise_sd, std::uint64_t seed,
                                       bool capture_queries = false) {
    dyadic_depth(n);
    return MeasurementOracle(n, 0, 0.0, budget, noise_sd, seed, capture_queries);
  }

  std::size_t dimension() const noexcept { return n_; }
  std::size_t budget() const noexcept { return budget_; }
  std::size_t used() const noexcept { return used_; }
  std::size_t budget_remaining() const noexcept { return budget_ - used_; }
  double noise_sd() const noexcept { return noise_sd_; }

  std::span<const Observation> transcript() const noexcept { return transcript_; }
  /// Empty unless the oracle was built with capture_queries = true.
  std::span<const QueryVector> captured_queries() const noexcept { return queries_; }

  double measure(std::span<const double> a) {
    if (a.size() != n_) throw Error(ErrorCode::DimensionMismatch, "query length differs from signal dimension");
    check_budget();
    check_norm(euclidean_norm(a));
    if (capture_) queries_.emplace_back(DenseQuery(a.begin(), a.end()));
    return record(amplitude_ * a[support_]);
  }

  double measure(const DenseQuery& a) { return measure(std::span<const double>(a)); }

  double measure(const SparseQuery& a) {
    if (a.dimension() != n_) throw Error(ErrorCode::DimensionMismatch, "query dimension differs from signal dimension");
    check_budget();
    check_norm(a.norm());
    if (capture_) queries_.emplace_back(a);
    return record(amplitude_ * a.entry(support_));
  }

  double measure(const QueryVector& a) {
    return std::visit([this](const auto& q) -> double {
      if constexpr (std::is_same_v<std::decay_t<decltype(q)>, DenseQuery>)
        return measure(std::span<const double>(q));
      else
        return measure(q);
    }, a);
  }

private:
  MeasurementOracle(std::size_t n, std::size_t support, double amplitude, std::size_t budget, double noise_sd,
                    std::uint64_t seed, bool capture_queries)
      : n_(n), support_(support), amplitude_(amplitude), budget_(budget), noise_sd_(noise_sd), rng_(seed),
        capture_(capture_queries) {
    if (budget_ < 1) throw Error(ErrorCode::NonpositiveBudget, "measurement budget must be at least 1");
    if (!(noise_sd_ >= 0.0) || !std::isfinite(noise_sd_))
      throw Error(ErrorCode::NegativeNoise, "noise standard deviation must be finite and >= 0");
  }

  void check_budget() const {
    if (used_ >= budget_)
      throw Error(ErrorCode::BudgetExhausted, "measurement budget of " + std::to_string(budget_) + " exhausted");
  }

  static void check_norm(double norm) {
    if (!(norm <= 1.0 + kNormTolerance))
      throw Error(ErrorCode::NormViolation, "query norm " + std::to_string(norm) + " exceeds 1");
  }

  double record(double clean) {
    // Draw even when sigma = 0 so the stream position only depends on the call count.
    const double z = normal_(rng_);
    const double y = clean + noise_sd_ * z;
    transcript_.push_back({used_, y});
    ++used_;
    return y;
  }

  std::size_t n_;
  std::size_t support_;
  double amplitude_;
  std::size_t budget_;
  std::size_t used_ = 0;
  double noise_sd_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  bool capture_;
  std::vector<Observation> transcript_;
  std::vector<QueryVector> queries_;
};

} // namespace cbs

#endif // CBS_SIGNAL_MODEL_HPP
