#ifndef CBS_SELFTEST_HPP
#define CBS_SELFTEST_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cbs/bounds.hpp"
#include "cbs/signal_model.hpp"
#include "cbs/strategies.hpp"

namespace cbs {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestOptions {
  bool fast = false;
  /// Overridable so a negative control can show the noiseless sweep notices a flipped tie rule.
  TieRule tie_rule = TieRule::GoRight;
};

/// Noiseless search must return the planted index for every n in
/// {2, ..., 1024}, every index and mu in {1e-3, 1, 1e3}; a zero signal
/// must resolve every tie to the right and end at n - 1.
inline PropertyResult check_noiseless_exactness(std::size_t max_n, TieRule tie_rule) {
  std::size_t cases = 0, failures = 0;
  for (std::size_t n = 2; n <= max_n; n *= 2) {
    const std::size_t m = minimum_budget(n);
    for (double mu : {1e-3, 1.0, 1e3}) {
      for (std::size_t j = 0; j < n; ++j) {
        MeasurementOracle oracle(make_signal(n, j, mu), m, 0.0, j);
        if (cbs_locate(oracle, n, m, {tie_rule}).estimated_index != j) ++failures;
        ++cases;
      }
    }
    MeasurementOracle zero = MeasurementOracle::zero_signal(n, m, 0.0, n);
    if (cbs_locate(zero, n, m, {tie_rule}).estimated_index != n - 1) ++failures;
    ++cases;
  }
  return {"noiseless exactness", failures == 0,
          std::to_string(failures) + " failures in " + std::to_string(cases) + " cases"};
}

/// m_s >= 1, sum m_s <= m and m_s 2^s >= m/2 over random valid (n, m).
inline PropertyResult check_allocation_identities(std::size_t pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::size_t violations = 0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const std::size_t s0 = 1 + rng() % 20;
    const std::size_t n = std::size_t{1} << s0;
    const std::size_t m = 2 * s0 + rng() % 5000;
    const StageAllocation alloc = stage_allocation(n, m);
    bool ok = alloc.stages() == s0 && alloc.total() <= m;
    for (std::size_t s = 1; s <= s0; ++s) {
      const std::size_t ms = alloc.counts[s - 1];
      ok = ok && ms >= 1 && 2 * ms * (std::size_t{1} << s) >= m;
    }
    if (!ok) ++violations;
  }
  return {"allocation identities", violations == 0,
          std::to_string(violations) + " violations in " + std::to_string(pairs) + " pairs"};
}

/// Q(t) <= exp(-t^2/2) / 2 on [0, 10].
inline PropertyResult check_tail_bound(std::size_t grid_points) {
  std::size_t violations = 0;
  for (std::size_t k = 0; k <= grid_points; ++k) {
    const double t = 10.0 * static_cast<double>(k) / static_cast<double>(grid_points);
    if (gaussian_upper_tail(t) > 0.5 * std::exp(-t * t / 2.0)) ++violations;
  }
  return {"gaussian tail bound", violations == 0, std::to_string(violations) + " violations"};
}

/// The exact per-stage flip probabilities sum to at most the closed-form bound.
inline PropertyResult check_union_bound_chain() {
  std::size_t violations = 0, cases = 0;
  for (std::size_t n = 4; n <= 4096; n *= 4) {
    for (std::size_t m : {minimum_budget(n), std::size_t{64}, std::size_t{256}, std::size_t{1000}}) {
      if (m < minimum_budget(n)) continue;
      const StageAllocation alloc = stage_allocation(n, m);
      for (double mu = 0.0; mu <= 30.0; mu += 0.5) {
        double sum = 0.0;
        for (std::size_t s = 1; s <= alloc.stages(); ++s) sum += stage_flip_probability(n, alloc.counts[s - 1], s, mu);
        if (sum > cbs_error_bound(n, m, mu) * (1.0 + 1e-12)) ++violations;
        ++cases;
      }
    }
  }
  return {"union bound chain", violations == 0,
          std::to_string(violations) + " violations in " + std::to_string(cases) + " cases"};
}

/// Single-measurement, two-coordinate designs a = r(cos t, sin t): the
/// exact TV between the two hypotheses obeys Pinsker and the sqrt(m/n) bound.
inline PropertyResult check_single_measurement_tv() {
  const double tv = tv_two_gaussians(std::numbers::sqrt2);
  bool ok = std::abs(tv - 0.5205) <= 1e-4 && tv <= tv_upper_bound(2, 1, 1.0);
  std::size_t violations = 0;
  for (int a_idx = 0; a_idx < 10; ++a_idx) {
    const double radius = 0.1 + 0.1 * a_idx;
    const double angle = 0.3 + 0.61 * a_idx;
    const double a1 = radius * std::cos(angle), a2 = radius * std::sin(angle);
    DenseMatrix design(1, 2, {a1, a2});
    for (int mu_idx = 1; mu_idx <= 10; ++mu_idx) {
      const double mu = 0.2 * mu_idx;
      const double tv_exact = tv_two_gaussians(mu * std::abs(a1 - a2));
      const double kl = 0.5 * mu * mu * (a1 - a2) * (a1 - a2);
      // Sanity check of the nonadaptive KL identity on the same design.
      const double kl_sum = kl_p0_pj(design, 0, mu) + kl_p0_pj(design, 1, mu);
      if (tv_exact * tv_exact > 0.5 * kl + 1e-15 || tv_exact * tv_exact > mu * mu / 2.0 + 1e-15 ||
          kl_sum > mu * mu / 2.0 * (1.0 + 1e-12))
        ++violations;
    }
  }
  ok = ok && violations == 0;
  return {"single-measurement TV (m=1, n=2)", ok, "TV(sqrt 2) = " + std::to_string(tv) + ", " + std::to_string(violations) +
                                        " Pinsker-grid violations in 100 points"};
}

inline std::vector<PropertyResult> run_selftest(const SelftestOptions& options = {}) {
  std::vector<PropertyResult> results;
  results.push_back(check_noiseless_exactness(1024, options.tie_rule));
  results.push_back(check_allocation_identities(options.fast ? 200 : 1000, 2024));
  results.push_back(check_tail_bound(options.fast ? 1000 : 100000));
  results.push_back(check_union_bound_chain());
  results.push_back(check_single_measurement_tv());
  return results;
}

} // namespace cbs

#endif // CBS_SELFTEST_HPP
