#ifndef CBS_CSV_HPP
#define CBS_CSV_HPP

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cbs/error.hpp"
#include "cbs/harness.hpp"

namespace cbs {

inline constexpr std::string_view kCsvHeader =
    "strategy,n,m,mu,trials,errors,p_err,ci_lo,ci_hi,bound_upper,bound_lower,seed";

/// printf("%.6g"): six significant digits, shortest form. The library never
/// calls setlocale, so the decimal separator is always '.'.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<ErrorCurve>& curves) {
  out << kCsvHeader << '\n';
  for (const auto& curve : curves) {
    for (const auto& p : curve.points) {
      out << strategy_name(curve.strategy) << ',' << config.n << ',' << config.m << ',' << format_real(p.mu) << ','
          << p.trials << ',' << p.errors << ',' << format_real(p.p_err) << ',' << format_real(p.ci_lo) << ','
          << format_real(p.ci_hi) << ',' << format_real(p.bound_upper) << ',' << format_real(p.bound_lower) << ','
          << config.master_seed << '\n';
    }
  }
}

/// One parsed data row of a harness CSV.
struct CsvRow {
  std::string strategy;
  std::size_t n = 0;
  std::size_t m = 0;
  double mu = 0.0;
  std::size_t trials = 0;
  std::size_t errors = 0;
  double p_err = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double bound_upper = 0.0;
  double bound_lower = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

[[noreturn]] inline void malformed(std::size_t line, const std::string& why) {
  throw Error(ErrorCode::MalformedCsv, "line " + std::to_string(line) + ": " + why);
}

template <class T>
T parse_field(std::string_view text, std::size_t line, std::string_view name) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) malformed(line, "bad value for " + std::string(name) + ": '" + std::string(text) + "'");
  return value;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

} // namespace detail

/// Reads a harness CSV. Requires the exact header and at least one data row.
inline std::vector<CsvRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) detail::malformed(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) detail::malformed(1, "unexpected header");

  std::vector<CsvRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split(line);
    if (f.size() != 12) detail::malformed(line_no, "expected 12 fields, found " + std::to_string(f.size()));
    CsvRow r;
    r.strategy = std::string(f[0]);
    if (r.strategy.empty()) detail::malformed(line_no, "empty strategy");
    r.n = detail::parse_field<std::size_t>(f[1], line_no, "n");
    r.m = detail::parse_field<std::size_t>(f[2], line_no, "m");
    r.mu = detail::parse_field<double>(f[3], line_no, "mu");
    r.trials = detail::parse_field<std::size_t>(f[4], line_no, "trials");
    r.errors = detail::parse_field<std::size_t>(f[5], line_no, "errors");
    r.p_err = detail::parse_field<double>(f[6], line_no, "p_err");
    r.ci_lo = detail::parse_field<double>(f[7], line_no, "ci_lo");
    r.ci_hi = detail::parse_field<double>(f[8], line_no, "ci_hi");
    r.bound_upper = detail::parse_field<double>(f[9], line_no, "bound_upper");
    r.bound_lower = detail::parse_field<double>(f[10], line_no, "bound_lower");
    r.seed = detail::parse_field<std::uint64_t>(f[11], line_no, "seed");
    if (r.errors > r.trials) detail::malformed(line_no, "errors exceed trials");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) detail::malformed(line_no + 1, "no data rows");
  return rows;
}

} // namespace cbs

#endif // CBS_CSV_HPP
