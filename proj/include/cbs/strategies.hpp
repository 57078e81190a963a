#ifndef CBS_STRATEGIES_HPP
#define CBS_STRATEGIES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cbs/error.hpp"
#include "cbs/signal_model.hpp"

namespace cbs {

// ---------------------------------------------------------------------------
// Compressive binary search
// ---------------------------------------------------------------------------

/// Per-stage measurement counts for the bisection search; counts[s-1] is the
/// number of repeats at stage s.
struct StageAllocation {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<std::size_t> counts;

  std::size_t stages() const noexcept { return counts.size(); }
  std::size_t total() const noexcept { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
};

inline std::size_t minimum_budget(std::size_t n) { return 2 * dyadic_depth(n); }

/// m_s = floor((m - s0) 2^-s) + 1 for s = 1..s0, s0 = log2 n.
inline StageAllocation stage_allocation(std::size_t n, std::size_t m) {
  const std::size_t s0 = dyadic_depth(n);
  if (m < 2 * s0)
    throw Error(ErrorCode::BudgetTooSmall,
                "budget below 2·log2(n) = " + std::to_string(2 * s0));
  StageAllocation alloc{n, m, {}};
  alloc.counts.reserve(s0);
  for (std::size_t s = 1; s <= s0; ++s) alloc.counts.push_back(((m - s0) >> s) + 1);
  return alloc;
}

/// Query that is +c on the left half and -c on the right half of the stage-s
/// dyadic interval starting at `interval_start`, with c = 2^{-(s0-s+1)/2}
/// so the vector has unit norm.
inline SparseQuery bisection_vector(std::size_t n, std::size_t s, std::size_t interval_start) {
  const std::size_t s0 = dyadic_depth(n);
  if (s < 1 || s > s0)
    throw Error(ErrorCode::InvalidInterval, "stage " + std::to_string(s) + " outside [1, " + std::to_string(s0) + "]");
  const std::size_t width_log = s0 - s + 1;
  const std::size_t length = std::size_t{1} << width_log;
  if (interval_start % length != 0 || interval_start + length > n)
    throw Error(ErrorCode::InvalidInterval, "interval start " + std::to_string(interval_start) +
                                                " is not aligned to length " + std::to_string(length));
  const double c = std::exp2(-0.5 * static_cast<double>(width_log));
  const std::size_t half = length / 2;
  return SparseQuery(n, {{interval_start, half, c}, {interval_start + half, half, -c}});
}

/// Which way a decision statistic of exactly zero sends the search.
enum class TieRule { GoRight, GoLeft };

/// Current dyadic interval of the search and the decisions taken so far.
struct SearchState {
  std::size_t stage = 1;
  std::size_t interval_start = 0;
  std::size_t interval_length = 0;
  std::vector<double> decision_trace;
};

struct StrategyOutcome {
  std::size_t estimated_index = 0;
  std::size_t measurements_used = 0;
  std::vector<double> decision_trace;
};

struct CbsOptions {
  TieRule tie_rule = TieRule::GoRight;
};

/// Compressive binary search. At stage s the search measures m_s times with
/// the bisection vector of its current interval, sums the observations into
/// w, and keeps the left half iff w > 0.
inline StrategyOutcome cbs_locate(MeasurementOracle& oracle, std::size_t n, std::size_t m, CbsOptions options = {}) {
  if (oracle.dimension() != n)
    throw Error(ErrorCode::DimensionMismatch, "oracle dimension differs from n");
  const StageAllocation alloc = stage_allocation(n, m);

  SearchState state{1, 0, n, {}};
  state.decision_trace.reserve(alloc.stages());
  const std::size_t before = oracle.used();
  for (; state.stage <= alloc.stages(); ++state.stage) {
    const SparseQuery u = bisection_vector(n, state.stage, state.interval_start);
    double w = 0.0;
    for (std::size_t i = 0; i < alloc.counts[state.stage - 1]; ++i) w += oracle.measure(u);
    state.decision_trace.push_back(w);

    state.interval_length /= 2;
    const bool go_left = w > 0.0 || (w == 0.0 && options.tie_rule == TieRule::GoLeft);
    if (!go_left) state.interval_start += state.interval_length;
  }
  return {state.interval_start, oracle.used() - before, std::move(state.decision_trace)};
}

// ---------------------------------------------------------------------------
// Nonadaptive baseline
// ---------------------------------------------------------------------------

template <class M>
concept RowMatrix = requires(const M& a, std::size_t i, std::span<double> out) {
  { a.rows() } -> std::convertible_to<std::size_t>;
  { a.cols() } -> std::convertible_to<std::size_t>;
  a.copy_row(i, out);
};

/// Row-major dense matrix.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw Error(ErrorCode::DimensionMismatch, "matrix data size mismatch");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  void copy_row(std::size_t i, std::span<double> out) const {
    const auto r = row(i);
    std::copy(r.begin(), r.end(), out.begin());
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// m x n matrix with i.i.d. equiprobable entries +-1/sqrt(n), stored as one
/// sign bit per entry (bit set = negative). Every row has unit norm.
class RademacherMatrix {
public:
  RademacherMatrix(std::size_t rows, std::size_t cols, std::uint64_t seed)
      : rows_(rows), cols_(cols), words_per_row_((cols + 63) / 64),
        scale_(1.0 / std::sqrt(static_cast<double>(cols))), bits_(rows * words_per_row_) {
    std::mt19937_64 rng(seed);
    for (auto& word : bits_) word = rng();
    for (std::size_t b = 0; b < 256; ++b)
      for (std::size_t k = 0; k < 8; ++k) byte_table_[b][k] = ((b >> k) & 1u) ? -scale_ : scale_;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double scale() const noexcept { return scale_; }

  double operator()(std::size_t i, std::size_t j) const {
    const std::uint64_t word = bits_[i * words_per_row_ + j / 64];
    return ((word >> (j % 64)) & 1u) ? -scale_ : scale_;
  }

  void copy_row(std::size_t i, std::span<double> out) const {
    const std::uint64_t* words = bits_.data() + i * words_per_row_;
    std::size_t j = 0;
    for (; j + 8 <= cols_; j += 8) {
      const auto byte = static_cast<std::uint8_t>(words[j / 64] >> (j % 64));
      std::copy_n(byte_table_[byte].begin(), 8, out.begin() + static_cast<std::ptrdiff_t>(j));
    }
    for (; j < cols_; ++j) out[j] = ((words[j / 64] >> (j % 64)) & 1u) ? -scale_ : scale_;
  }

  DenseMatrix to_dense() const {
    DenseMatrix out(rows_, cols_);
    std::vector<double> row(cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
      copy_row(i, row);
      for (std::size_t j = 0; j < cols_; ++j) out(i, j) = row[j];
    }
    return out;
  }

private:
  std::size_t rows_;
  std::size_t cols_;
  std::size_t words_per_row_;
  double scale_;
  std::vector<std::uint64_t> bits_;
  // Scaled entries for each byte of sign bits, least significant bit first.
  std::array<std::array<double, 8>, 256> byte_table_{};
};

inline RademacherMatrix build_rademacher_matrix(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw Error(ErrorCode::InvalidConfig, "matrix dimensions must be positive");
  return RademacherMatrix(m, n, seed);
}

/// One-step OMP: measure every row of A once (the rows do not depend on any
/// observation), then return the column with the largest absolute
/// correlation with y. Ties go to the lowest index.
template <RowMatrix M>
StrategyOutcome omp_locate(MeasurementOracle& oracle, const M& A) {
  if (A.cols() != oracle.dimension())
    throw Error(ErrorCode::DimensionMismatch, "matrix column count differs from oracle dimension");
  const std::size_t n = A.cols();
  std::vector<double> row(n);
  std::vector<double> correlation(n, 0.0);
  const std::size_t before = oracle.used();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    A.copy_row(i, row);
    const double y = oracle.measure(std::span<const double>(row));
    for (std::size_t j = 0; j < n; ++j) correlation[j] += row[j] * y;
  }
  std::size_t best = 0;
  double best_abs = std::abs(correlation[0]);
  for (std::size_t j = 1; j < n; ++j) {
    const double v = std::abs(correlation[j]);
    if (v > best_abs) {
      best_abs = v;
      best = j;
    }
  }
  return {best, oracle.used() - before, {}};
}

// ---------------------------------------------------------------------------
// Locate, then estimate the amplitude
// ---------------------------------------------------------------------------

/// Sparse estimate of the full vector: `value` at `index`, zero elsewhere.
struct SparseEstimate {
  std::size_t index = 0;
  double value = 0.0;
  std::size_t locate_measurements = 0;
  std::size_t estimate_measurements = 0;
};

/// ||x_hat - x||^2 for a sparse estimate against the true signal.
inline double squared_error(const SparseEstimate& est, const SignalSpec& truth) {
  if (est.index == truth.support_index) {
    const double d = est.value - truth.amplitude;
    return d * d;
  }
  return est.value * est.value + truth.amplitude * truth.amplitude;
}

struct TwoStageSplit {
  std::size_t locate = 0;
  std::size_t estimate = 0;
};

inline TwoStageSplit two_stage_split(std::size_t n, std::size_t m, double locate_fraction) {
  if (!(locate_fraction > 0.0 && locate_fraction < 1.0))
    throw Error(ErrorCode::BudgetTooSmall, "locate fraction must lie in (0, 1)");
  // The 1e-9 slack keeps products like 0.6 * 20 from flooring to 11.
  const auto locate = static_cast<std::size_t>(std::floor(locate_fraction * static_cast<double>(m) + 1e-9));
  if (locate < minimum_budget(n))
    throw Error(ErrorCode::BudgetTooSmall, "locate budget " + std::to_string(locate) + " below 2·log2(n) = " +
                                               std::to_string(minimum_budget(n)));
  if (locate >= m) throw Error(ErrorCode::BudgetTooSmall, "no measurements left for the estimation stage");
  return {locate, m - locate};
}

/// Runs cbs_locate on floor(locate_fraction * m) measurements, then spends
/// the rest on the standard basis vector at the located index and reports
/// their mean as the amplitude.
inline SparseEstimate two_stage_estimate(MeasurementOracle& oracle, std::size_t n, std::size_t m,
                                         double locate_fraction = 0.5) {
  const TwoStageSplit split = two_stage_split(n, m, locate_fraction);
  const StrategyOutcome located = cbs_locate(oracle, n, split.locate);

  const SparseQuery basis(n, {{located.estimated_index, 1, 1.0}});
  double sum = 0.0;
  for (std::size_t i = 0; i < split.estimate; ++i) sum += oracle.measure(basis);
  return {located.estimated_index, sum / static_cast<double>(split.estimate), located.measurements_used,
          split.estimate};
}

} // namespace cbs

#endif // CBS_STRATEGIES_HPP
