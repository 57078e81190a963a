#ifndef CBS_BOUNDS_HPP
#define CBS_BOUNDS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>

#include "cbs/error.hpp"
#include "cbs/signal_model.hpp"
#include "cbs/strategies.hpp"

namespace cbs {

/// P(N(0,1) > t) = erfc(t / sqrt 2) / 2, using the C library erfc
/// (glibc's implementation is accurate to a few ulp over the whole line).
inline double gaussian_upper_tail(double t) { return 0.5 * std::erfc(t / std::numbers::sqrt2); }

/// Probability that the stage-s decision statistic has the wrong sign when
/// the search is still on the true path: Q(mu * sqrt(m_s 2^s / (2n))).
inline double stage_flip_probability(std::size_t n, std::size_t m_s, std::size_t s, double mu) {
  const double snr = mu * std::sqrt(static_cast<double>(m_s) * std::exp2(static_cast<double>(s)) /
                                    (2.0 * static_cast<double>(n)));
  return gaussian_upper_tail(snr);
}

/// Upper bound (log2 n / 2) exp(-mu^2 m / (8n)) on the binary search error
/// probability. Exceeds 1 for small mu; see cbs_error_bound_capped.
inline double cbs_error_bound(std::size_t n, std::size_t m, double mu) {
  const std::size_t s0 = dyadic_depth(n);
  if (m < 2 * s0) throw Error(ErrorCode::BudgetTooSmall, "budget below 2·log2(n) = " + std::to_string(2 * s0));
  return 0.5 * static_cast<double>(s0) *
         std::exp(-mu * mu * static_cast<double>(m) / (8.0 * static_cast<double>(n)));
}

inline double cbs_error_bound_capped(std::size_t n, std::size_t m, double mu) {
  return std::min(1.0, cbs_error_bound(n, m, mu));
}

/// Smallest mu at which cbs_error_bound(n, m, mu) equals target_pe.
inline double required_mu(std::size_t n, std::size_t m, double target_pe) {
  const double s0 = static_cast<double>(dyadic_depth(n));
  if (!(target_pe > 0.0 && target_pe < s0 / 2.0))
    throw Error(ErrorCode::InvalidTarget, "target error probability must lie in (0, log2(n)/2)");
  return std::sqrt(8.0 * static_cast<double>(n) / static_cast<double>(m) * std::log(s0 / (2.0 * target_pe)));
}

/// Lower bound on the failure probability of any left/right test under a
/// uniform prior: max(0, (1 - mu sqrt(m/n)) / 2).
inline double testing_lower_bound(std::size_t n, std::size_t m, double mu) {
  if (n < 2 || n % 2 != 0) throw Error(ErrorCode::InvalidConfig, "testing bound needs an even dimension");
  return std::max(0.0, 0.5 * (1.0 - mu * std::sqrt(static_cast<double>(m) / static_cast<double>(n))));
}

/// Amplitude thresholds with all constants set to 1. Logarithms are natural
/// except for the inner log2 of the binary search threshold.
struct ThresholdSet {
  double adaptive_floor = 0.0;        // sqrt(n/m)
  double cbs_threshold = 0.0;         // sqrt((n/m) ln log2 n)
  double nonadaptive_threshold = 0.0; // sqrt((n/m) ln n)
};

inline ThresholdSet thresholds(std::size_t n, std::size_t m) {
  const double s0 = static_cast<double>(dyadic_depth(n));
  if (m < 1) throw Error(ErrorCode::NonpositiveBudget, "measurement budget must be at least 1");
  const double ratio = static_cast<double>(n) / static_cast<double>(m);
  // n = 2 gives ln(log2 2) = 0, so the cbs threshold collapses to 0 there.
  return {std::sqrt(ratio), std::sqrt(ratio * std::log(s0)), std::sqrt(ratio * std::log(static_cast<double>(n)))};
}

/// Minimax lower bound 1/(27 m) on (1/n) E||x_hat - x||^2 over 1-sparse x.
inline double mse_lower_bound(std::size_t m) {
  if (m < 1) throw Error(ErrorCode::NonpositiveBudget, "measurement budget must be at least 1");
  return 1.0 / (27.0 * static_cast<double>(m));
}

/// KL(P_0, P_(j)) = (mu^2 / 2) sum_i a_ij^2 for a fixed (nonadaptive) design A.
template <RowMatrix M>
double kl_p0_pj(const M& A, std::size_t j, double mu) {
  if (j >= A.cols()) throw Error(ErrorCode::IndexOutOfRange, "column index outside the design");
  std::vector<double> row(A.cols());
  double acc = 0.0;
  for (std::size_t i = 0; i < A.rows(); ++i) {
    A.copy_row(i, row);
    const double norm = euclidean_norm(row);
    if (!(norm <= 1.0 + kNormTolerance))
      throw Error(ErrorCode::NormViolation, "design row " + std::to_string(i) + " has norm above 1");
    acc += row[j] * row[j];
  }
  return 0.5 * mu * mu * acc;
}

/// Upper bound min(1, mu sqrt(m/n)) on the total variation between the
/// left-half and right-half measurement laws.
inline double tv_upper_bound(std::size_t n, std::size_t m, double mu) {
  if (n < 2 || n % 2 != 0) throw Error(ErrorCode::InvalidConfig, "TV bound needs an even dimension");
  return std::min(1.0, mu * std::sqrt(static_cast<double>(m) / static_cast<double>(n)));
}

/// Total variation between N(0,1) and N(delta,1).
inline double tv_two_gaussians(double delta) { return 1.0 - 2.0 * gaussian_upper_tail(std::abs(delta) / 2.0); }

} // namespace cbs

#endif // CBS_BOUNDS_HPP
