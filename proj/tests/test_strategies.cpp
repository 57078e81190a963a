#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "cbs/strategies.hpp"

namespace {

using cbs::ErrorCode;

template <class F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const cbs::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected cbs::Error";
  return ErrorCode::InvalidConfig;
}

// Reference allocation evaluated in floating point, independent of the
// integer shift used by the library.
std::vector<std::size_t> reference_allocation(std::size_t n, std::size_t m) {
  const std::size_t s0 = static_cast<std::size_t>(std::lround(std::log2(static_cast<double>(n))));
  std::vector<std::size_t> out;
  for (std::size_t s = 1; s <= s0; ++s)
    out.push_back(static_cast<std::size_t>(std::floor((static_cast<double>(m) - s0) * std::pow(2.0, -double(s)))) + 1);
  return out;
}

TEST(StageAllocation, Examples) {
  const std::vector<std::size_t> fig{123, 62, 31, 16, 8, 4, 2, 1, 1, 1, 1, 1};
  const auto a = cbs::stage_allocation(4096, 256);
  EXPECT_EQ(a.counts, fig);
  EXPECT_EQ(a.counts, reference_allocation(4096, 256));
  EXPECT_EQ(a.total(), 251u);

  EXPECT_EQ(cbs::stage_allocation(4, 4).counts, (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(cbs::stage_allocation(4, 4).total(), 3u);

  const auto b = cbs::stage_allocation(64, 12);
  EXPECT_EQ(b.counts, (std::vector<std::size_t>{4, 2, 1, 1, 1, 1}));
  EXPECT_EQ(b.total(), 10u);
  std::size_t min_product = SIZE_MAX;
  for (std::size_t s = 1; s <= 6; ++s) min_product = std::min(min_product, b.counts[s - 1] << s);
  EXPECT_EQ(min_product, 8u);
}

TEST(StageAllocation, Errors) {
  EXPECT_EQ(error_code_of([] { cbs::stage_allocation(4096, 23); }), ErrorCode::BudgetTooSmall);
  EXPECT_EQ(error_code_of([] { cbs::stage_allocation(100, 256); }), ErrorCode::DimensionNotDyadic);
  EXPECT_NO_THROW(cbs::stage_allocation(4096, 24));
}

TEST(StageAllocation, IdentitiesHoldForRandomValidPairs) {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t s0 = 1 + rng() % 20;
    const std::size_t n = std::size_t{1} << s0;
    const std::size_t m = 2 * s0 + rng() % 10000;
    const auto a = cbs::stage_allocation(n, m);
    ASSERT_EQ(a.counts, reference_allocation(n, m)) << n << " " << m;
    ASSERT_LE(a.total(), m);
    for (std::size_t s = 1; s <= s0; ++s) {
      ASSERT_GE(a.counts[s - 1], 1u);
      ASSERT_GE(2 * (a.counts[s - 1] << s), m) << "n=" << n << " m=" << m << " s=" << s;
    }
  }
}

TEST(BisectionVector, Examples) {
  const auto u = cbs::bisection_vector(8, 1, 0).to_dense();
  const double c = std::pow(2.0, -1.5);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(u[i], c, 1e-15);
  for (std::size_t i = 4; i < 8; ++i) EXPECT_NEAR(u[i], -c, 1e-15);
  EXPECT_NEAR(u[0], 0.3535534, 1e-7);
  EXPECT_NEAR(cbs::euclidean_norm(u), 1.0, 1e-15);

  const auto v = cbs::bisection_vector(8, 3, 2).to_dense();
  const std::vector<double> expected{0, 0, std::sqrt(0.5), -std::sqrt(0.5), 0, 0, 0, 0};
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(v[i], expected[i], 1e-15);

  EXPECT_EQ(error_code_of([] { cbs::bisection_vector(8, 2, 1); }), ErrorCode::InvalidInterval);
  EXPECT_EQ(error_code_of([] { cbs::bisection_vector(8, 0, 0); }), ErrorCode::InvalidInterval);
  EXPECT_EQ(error_code_of([] { cbs::bisection_vector(8, 4, 0); }), ErrorCode::InvalidInterval);
  EXPECT_EQ(error_code_of([] { cbs::bisection_vector(8, 2, 8); }), ErrorCode::InvalidInterval);
}

TEST(BisectionVector, UnitNormEverywhere) {
  for (std::size_t s0 = 1; s0 <= 20; ++s0) {
    const std::size_t n = std::size_t{1} << s0;
    for (std::size_t s = 1; s <= s0; ++s) {
      const std::size_t length = n >> (s - 1);
      const std::size_t start = (n - length) / length * length;
      const auto u = cbs::bisection_vector(n, s, start);
      ASSERT_NEAR(u.norm(), 1.0, 1e-12);
      if (s0 <= 14) {
        ASSERT_NEAR(cbs::euclidean_norm(u.to_dense()), 1.0, 1e-12);
      }
    }
  }
}

TEST(CbsLocate, NoiselessFindsEveryIndex) {
  for (std::size_t j = 0; j < 64; ++j) {
    cbs::MeasurementOracle oracle(cbs::make_signal(64, j, 1.0), 12, 0.0, j);
    const auto out = cbs::cbs_locate(oracle, 64, 12);
    EXPECT_EQ(out.estimated_index, j);
    EXPECT_EQ(out.measurements_used, 10u);
    EXPECT_EQ(out.decision_trace.size(), 6u);
  }
}

TEST(CbsLocate, SingleStageSignArgument) {
  cbs::MeasurementOracle oracle(cbs::make_signal(2, 1, 5.0), 2, 0.0, 0);
  const auto out = cbs::cbs_locate(oracle, 2, 2);
  EXPECT_EQ(out.estimated_index, 1u);
  ASSERT_EQ(out.decision_trace.size(), 1u);
  EXPECT_EQ(out.measurements_used, 1u);
  EXPECT_NEAR(out.decision_trace[0], -5.0 / std::sqrt(2.0), 1e-12);
}

TEST(CbsLocate, ExhaustiveNoiselessSweep) {
  for (std::size_t n = 2; n <= 1024; n *= 2) {
    const std::size_t m = cbs::minimum_budget(n);
    for (double mu : {1e-3, 1.0, 1e3}) {
      for (std::size_t j = 0; j < n; ++j) {
        cbs::MeasurementOracle oracle(cbs::make_signal(n, j, mu), m, 0.0, 0);
        ASSERT_EQ(cbs::cbs_locate(oracle, n, m).estimated_index, j) << "n=" << n << " j=" << j << " mu=" << mu;
      }
    }
  }
}

TEST(CbsLocate, NeverExceedsBudget) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 300; ++k) {
    const std::size_t s0 = 1 + rng() % 14;
    const std::size_t n = std::size_t{1} << s0;
    const std::size_t m = 2 * s0 + rng() % 300;
    cbs::MeasurementOracle oracle(cbs::make_signal(n, rng() % n, 0.5), m, 1.0, rng());
    const auto out = cbs::cbs_locate(oracle, n, m);
    ASSERT_EQ(out.measurements_used, cbs::stage_allocation(n, m).total());
    ASSERT_LE(out.measurements_used, m);
    ASSERT_LT(out.estimated_index, n);
  }
}

TEST(CbsLocate, TieRuleGoesRight) {
  for (std::size_t n = 2; n <= 256; n *= 2) {
    const std::size_t m = cbs::minimum_budget(n);
    auto right = cbs::MeasurementOracle::zero_signal(n, m, 0.0, 1);
    EXPECT_EQ(cbs::cbs_locate(right, n, m).estimated_index, n - 1);
    auto left = cbs::MeasurementOracle::zero_signal(n, m, 0.0, 1);
    EXPECT_EQ(cbs::cbs_locate(left, n, m, {cbs::TieRule::GoLeft}).estimated_index, 0u);
  }
}

TEST(CbsLocate, ZeroSignalLeafIsUniform) {
  constexpr std::size_t n = 4096, m = 256, trials = 100000;
  std::mt19937_64 rng(123);
  std::size_t hits = 0;
  std::vector<std::size_t> octants(8, 0);
  for (std::size_t t = 0; t < trials; ++t) {
    auto oracle = cbs::MeasurementOracle::zero_signal(n, m, 1.0, rng());
    const std::size_t planted = rng() % n;
    const std::size_t found = cbs::cbs_locate(oracle, n, m).estimated_index;
    hits += found == planted;
    ++octants[found / (n / 8)];
  }
  // Expected 24.4 hits (sd 4.9).
  EXPECT_GE(hits, 5u);
  EXPECT_LE(hits, 45u);
  // Each octant expects 12500 (sd ~105).
  for (std::size_t c : octants) EXPECT_NEAR(static_cast<double>(c), 12500.0, 600.0);
}

TEST(CbsLocate, RejectsMismatchedDimension) {
  cbs::MeasurementOracle oracle(cbs::make_signal(8, 0, 1.0), 20, 0.0, 0);
  EXPECT_EQ(error_code_of([&] { cbs::cbs_locate(oracle, 16, 20); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(error_code_of([&] { cbs::cbs_locate(oracle, 8, 5); }), ErrorCode::BudgetTooSmall);
  cbs::MeasurementOracle short_budget(cbs::make_signal(8, 0, 1.0), 6, 0.0, 0);
  EXPECT_EQ(error_code_of([&] { cbs::cbs_locate(short_budget, 8, 40); }), ErrorCode::BudgetExhausted);
}

TEST(RademacherMatrix, RowsHaveUnitNorm) {
  const auto a = cbs::build_rademacher_matrix(4, 2, 17);
  EXPECT_EQ(a.rows(), 2u);
  EXPECT_EQ(a.cols(), 4u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(std::abs(a(i, j)), 0.5);

  for (std::size_t n : {2u, 8u, 100u, 4096u}) {
    const auto b = cbs::build_rademacher_matrix(n, 16, n);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < 16; ++i) {
      b.copy_row(i, row);
      EXPECT_NEAR(cbs::euclidean_norm(row), 1.0, 1e-12);
      for (std::size_t j = 0; j < n; ++j) ASSERT_EQ(row[j], b(i, j));
    }
  }
}

TEST(RademacherMatrix, EntriesAreSymmetric) {
  constexpr std::size_t n = 1024, m = 1000;
  const auto a = cbs::build_rademacher_matrix(n, m, 4);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) sum += a(i, j);
  const double mean = sum / static_cast<double>(n * m);
  EXPECT_LE(std::abs(mean), 3.0 * (1.0 / std::sqrt(double(n))) / 1000.0);
}

TEST(RademacherMatrix, DeterministicInSeed) {
  const auto a = cbs::build_rademacher_matrix(300, 7, 11).to_dense();
  const auto b = cbs::build_rademacher_matrix(300, 7, 11).to_dense();
  const auto c = cbs::build_rademacher_matrix(300, 7, 12).to_dense();
  bool differs = false;
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 300; ++j) {
      ASSERT_EQ(a(i, j), b(i, j));
      differs = differs || a(i, j) != c(i, j);
    }
  EXPECT_TRUE(differs);
}

TEST(OmpLocate, TwoByTwoExamples) {
  const double r = 1.0 / std::sqrt(2.0);
  const cbs::DenseMatrix a(2, 2, {r, r, r, -r});
  cbs::MeasurementOracle left(cbs::make_signal(2, 0, 3.0), 2, 0.0, 0);
  const auto out_left = cbs::omp_locate(left, a);
  EXPECT_EQ(out_left.estimated_index, 0u);
  EXPECT_EQ(out_left.measurements_used, 2u);

  cbs::MeasurementOracle right(cbs::make_signal(2, 1, 3.0), 2, 0.0, 0);
  EXPECT_EQ(cbs::omp_locate(right, a).estimated_index, 1u);
}

TEST(OmpLocate, TieBreaksToLowestIndex) {
  const cbs::DenseMatrix a(1, 4, {0.5, 0.5, 0.5, 0.5});
  auto oracle = cbs::MeasurementOracle::zero_signal(4, 1, 0.0, 0);
  EXPECT_EQ(cbs::omp_locate(oracle, a).estimated_index, 0u);

  // |correlation| ties between a positive and a negative column.
  const cbs::DenseMatrix b(1, 4, {0.0, -0.5, 0.5, 0.0});
  cbs::MeasurementOracle signal(cbs::make_signal(4, 2, 1.0), 1, 0.0, 0);
  EXPECT_EQ(cbs::omp_locate(signal, b).estimated_index, 1u);
}

TEST(OmpLocate, DeterministicAndBudgetBounded) {
  const auto a = cbs::build_rademacher_matrix(256, 64, 3);
  cbs::MeasurementOracle x(cbs::make_signal(256, 77, 6.0), 64, 1.0, 8);
  cbs::MeasurementOracle y(cbs::make_signal(256, 77, 6.0), 64, 1.0, 8);
  EXPECT_EQ(cbs::omp_locate(x, a).estimated_index, cbs::omp_locate(y, a).estimated_index);
  EXPECT_EQ(x.budget_remaining(), 0u);

  cbs::MeasurementOracle small(cbs::make_signal(256, 77, 6.0), 63, 1.0, 8);
  EXPECT_EQ(error_code_of([&] { cbs::omp_locate(small, a); }), ErrorCode::BudgetExhausted);
}

TEST(OmpLocate, DenseAndBitMatricesAgree) {
  const auto bits = cbs::build_rademacher_matrix(128, 40, 21);
  const auto dense = bits.to_dense();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cbs::MeasurementOracle a(cbs::make_signal(128, seed * 5, 4.0), 40, 1.0, seed);
    cbs::MeasurementOracle b(cbs::make_signal(128, seed * 5, 4.0), 40, 1.0, seed);
    EXPECT_EQ(cbs::omp_locate(a, bits).estimated_index, cbs::omp_locate(b, dense).estimated_index);
  }
}

TEST(TwoStage, NoiselessExactValue) {
  cbs::MeasurementOracle oracle(cbs::make_signal(64, 41, 2.5), 20, 0.0, 0);
  const auto est = cbs::two_stage_estimate(oracle, 64, 20, 0.6);
  EXPECT_EQ(est.locate_measurements, 10u); // allocation for m = 12 spends 10
  EXPECT_EQ(est.estimate_measurements, 8u);
  EXPECT_EQ(est.index, 41u);
  EXPECT_EQ(est.value, 2.5);
  EXPECT_EQ(cbs::two_stage_split(64, 20, 0.6).locate, 12u);
}

TEST(TwoStage, ValueMseMatchesMeanOfUnitDraws) {
  // Large amplitude keeps the location correct; the value is then the mean
  // of 128 unit-variance draws, whose MSE is 1/128.
  constexpr std::size_t trials = 10000;
  double total = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto truth = cbs::make_signal(64, t % 64, 200.0);
    cbs::MeasurementOracle oracle(truth, 256, 1.0, 1000 + t);
    const auto est = cbs::two_stage_estimate(oracle, 64, 256, 0.5);
    ASSERT_EQ(est.index, truth.support_index);
    ASSERT_EQ(est.estimate_measurements, 128u);
    total += cbs::squared_error(est, truth);
  }
  EXPECT_NEAR(total / trials, 0.0078125, 0.15 * 0.0078125);
}

TEST(TwoStage, BudgetErrors) {
  cbs::MeasurementOracle oracle(cbs::make_signal(64, 0, 1.0), 20, 0.0, 0);
  EXPECT_EQ(error_code_of([&] { cbs::two_stage_estimate(oracle, 64, 20, 0.5); }), ErrorCode::BudgetTooSmall);
  EXPECT_EQ(error_code_of([&] { cbs::two_stage_estimate(oracle, 64, 12, 0.99); }), ErrorCode::BudgetTooSmall);
  EXPECT_EQ(error_code_of([&] { cbs::two_stage_estimate(oracle, 64, 20, 1.5); }), ErrorCode::BudgetTooSmall);
}

TEST(TwoStage, SquaredError) {
  const auto truth = cbs::make_signal(8, 3, 2.0);
  EXPECT_EQ(cbs::squared_error({3, 2.5, 0, 0}, truth), 0.25);
  EXPECT_EQ(cbs::squared_error({4, 1.0, 0, 0}, truth), 5.0);
}

} // namespace
