// Command-line front end: experiments, bounds, the n=4096 / m=256 figure,
// plotting and a property self-test.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbs/cbs.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError {
  std::string flag;
  std::string reason;
};

int usage_failure(const UsageError& e) {
  std::cerr << "error: " << e.flag << ": " << e.reason << '\n';
  return kExitUsage;
}

/// "start:stop:step" (inclusive of stop within 1e-9) or a comma list.
std::vector<double> parse_mu_list(const std::string& text) {
  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw UsageError{"--mu", "cannot parse '" + s + "'"};
    }
    if (used != s.size()) throw UsageError{"--mu", "cannot parse '" + s + "'"};
    return v;
  };

  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw UsageError{"--mu", "expected start:stop:step"};
    const double start = to_double(parts[0]), stop = to_double(parts[1]), step = to_double(parts[2]);
    if (!(step > 0.0) || stop < start) throw UsageError{"--mu", "grid needs step > 0 and stop >= start"};
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(to_double(p));
  }
  if (out.empty()) throw UsageError{"--mu", "no values"};
  return out;
}

std::vector<cbs::StrategyId> parse_strategies(const std::string& text) {
  std::vector<cbs::StrategyId> out;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) {
    const auto id = cbs::parse_strategy(p);
    if (!id) throw UsageError{"--strategies", "unknown strategy '" + p + "'"};
    out.push_back(*id);
  }
  if (out.empty()) throw UsageError{"--strategies", "no strategies given"};
  return out;
}

std::string flag_for(cbs::ErrorCode code, const std::string& what) {
  switch (code) {
    case cbs::ErrorCode::DimensionNotDyadic: return "--n";
    case cbs::ErrorCode::BudgetTooSmall:
      return what.find("locate") != std::string::npos || what.find("estimation") != std::string::npos
                 ? "--locate-fraction"
                 : "--m";
    case cbs::ErrorCode::NegativeNoise: return "--noise-sd";
    default: break;
  }
  if (what.find("mu") != std::string::npos) return "--mu";
  if (what.find("trials") != std::string::npos) return "--trials";
  if (what.find("confidence") != std::string::npos) return "--confidence";
  if (what.find("strateg") != std::string::npos) return "--strategies";
  return "config";
}

/// Validates and runs; writes CSV to `out_path` ("-" for stdout).
int run_experiment(const cbs::ExperimentConfig& config, const std::string& out_path,
                   std::vector<cbs::ErrorCurve>* curves_out = nullptr) {
  try {
    cbs::validate_config(config);
  } catch (const cbs::Error& e) {
    return usage_failure({flag_for(e.code(), e.what()), e.what()});
  }
  try {
    const auto curves = cbs::run_curve(config);
    if (out_path == "-") {
      cbs::write_csv(std::cout, config, curves);
    } else {
      std::ofstream file(out_path, std::ios::binary);
      if (!file) {
        std::cerr << "error: cannot open " << out_path << " for writing\n";
        return kExitRuntime;
      }
      cbs::write_csv(file, config, curves);
      if (!file) {
        std::cerr << "error: failed writing " << out_path << '\n';
        return kExitRuntime;
      }
    }
    if (curves_out) *curves_out = curves;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

struct RunFlags {
  std::size_t n = 4096;
  std::size_t m = 256;
  std::string mu;
  std::size_t trials = 10000;
  std::string strategies = "cbs,omp";
  std::uint64_t seed = 42;
  std::string out = "-";
  double noise_sd = 1.0;
  double confidence = 0.95;
  double locate_fraction = 0.5;
  std::size_t workers = 0;
};

int cmd_run(const RunFlags& f) {
  cbs::ExperimentConfig config;
  try {
    config.mu_grid = parse_mu_list(f.mu);
    config.strategies = parse_strategies(f.strategies);
  } catch (const UsageError& e) {
    return usage_failure(e);
  }
  config.n = f.n;
  config.m = f.m;
  config.trials = f.trials;
  config.master_seed = f.seed;
  config.noise_sd = f.noise_sd;
  config.confidence_level = f.confidence;
  config.locate_fraction = f.locate_fraction;
  config.workers = f.workers;
  return run_experiment(config, f.out);
}

struct BoundsFlags {
  std::size_t n = 4096;
  std::size_t m = 256;
  std::string mu;
  std::optional<double> target_pe;
};

int cmd_bounds(const BoundsFlags& f) {
  if (!cbs::is_dyadic(f.n)) return usage_failure({"--n", "dimension must be a power of 2"});
  if (f.m < cbs::minimum_budget(f.n))
    return usage_failure({"--m", "budget below 2·log2(n) = " + std::to_string(cbs::minimum_budget(f.n))});
  std::vector<double> mus;
  if (!f.mu.empty()) {
    try {
      mus = parse_mu_list(f.mu);
    } catch (const UsageError& e) {
      return usage_failure(e);
    }
  }
  if (f.target_pe) {
    const double s0 = static_cast<double>(cbs::dyadic_depth(f.n));
    if (!(*f.target_pe > 0.0 && *f.target_pe < s0 / 2.0))
      return usage_failure({"--target-pe", "target must lie in (0, log2(n)/2)"});
  }

  const cbs::ThresholdSet t = cbs::thresholds(f.n, f.m);
  char line[160];
  std::printf("n = %zu, m = %zu (thresholds with constants set to 1)\n", f.n, f.m);
  std::printf("  adaptive_floor         %9.3f   sqrt(n/m)\n", t.adaptive_floor);
  std::printf("  cbs_threshold          %9.3f   sqrt((n/m) ln log2 n)\n", t.cbs_threshold);
  std::printf("  nonadaptive_threshold  %9.3f   sqrt((n/m) ln n)\n", t.nonadaptive_threshold);
  if (!mus.empty()) {
    std::printf("%-10s %-14s %-14s %-14s\n", "mu", "upper_raw", "upper_capped", "lower");
    for (double mu : mus) {
      std::snprintf(line, sizeof line, "%-10s %-14s %-14s %-14s", cbs::format_real(mu).c_str(),
                    cbs::format_real(cbs::cbs_error_bound(f.n, f.m, mu)).c_str(),
                    cbs::format_real(cbs::cbs_error_bound_capped(f.n, f.m, mu)).c_str(),
                    cbs::format_real(cbs::testing_lower_bound(f.n, f.m, mu)).c_str());
      std::printf("%s\n", line);
    }
  }
  if (f.target_pe)
    std::printf("required_mu for P_e <= %s: %.3f\n", cbs::format_real(*f.target_pe).c_str(),
                cbs::required_mu(f.n, f.m, *f.target_pe));
  return kExitOk;
}

int write_svg(const std::string& path, const std::vector<cbs::CsvRow>& rows, const cbs::PlotOptions& options) {
  const std::string svg = cbs::render_svg(rows, options);
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    std::cerr << "error: cannot open " << path << " for writing\n";
    return kExitRuntime;
  }
  file << svg;
  return file ? kExitOk : kExitRuntime;
}

cbs::PlotOptions threshold_rules(std::size_t n, std::size_t m) {
  cbs::PlotOptions options;
  if (cbs::is_dyadic(n) && m >= 1) {
    const auto t = cbs::thresholds(n, m);
    options.rules = {t.adaptive_floor, t.cbs_threshold, t.nonadaptive_threshold};
  }
  return options;
}

struct Fig1Flags {
  std::size_t trials = 10000;
  std::uint64_t seed = 42;
  std::string out_prefix = "fig1";
  std::size_t workers = 0;
};

int cmd_reproduce_fig1(const Fig1Flags& f) {
  if (f.trials < 1) return usage_failure({"--trials", "trials must be at least 1"});
  cbs::ExperimentConfig config;
  config.n = 4096;
  config.m = 256;
  config.mu_grid = parse_mu_list("0:14:0.5");
  config.trials = f.trials;
  config.strategies = {cbs::StrategyId::Cbs, cbs::StrategyId::Omp};
  config.master_seed = f.seed;
  config.workers = f.workers;

  const std::string csv_path = f.out_prefix + ".csv";
  const std::string svg_path = f.out_prefix + ".svg";
  if (const int rc = run_experiment(config, csv_path); rc != kExitOk) return rc;
  try {
    std::ifstream in(csv_path, std::ios::binary);
    const auto rows = cbs::read_csv(in);
    cbs::PlotOptions options = threshold_rules(config.n, config.m);
    options.title = "Binary search vs OMP, n = 4096, m = 256";
    if (const int rc = write_svg(svg_path, rows, options); rc != kExitOk) return rc;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  std::cout << "wrote " << csv_path << " and " << svg_path << '\n';
  return kExitOk;
}

int cmd_plot(const std::string& in_path, const std::string& out_path) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open " << in_path << '\n';
    return kExitRuntime;
  }
  try {
    const auto rows = cbs::read_csv(in);
    return write_svg(out_path, rows, threshold_rules(rows.front().n, rows.front().m));
  } catch (const cbs::Error& e) {
    std::cerr << "error: " << cbs::to_string(e.code()) << ": " << in_path << ": " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_selftest(bool fast) {
  bool all = true;
  for (const auto& r : cbs::run_selftest({fast, cbs::TieRule::GoRight})) {
    std::cout << (r.passed ? "pass" : "FAIL") << "  " << r.name << "  (" << r.detail << ")\n";
    all = all && r.passed;
  }
  return all ? kExitOk : kExitRuntime;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locate the nonzero entry of a 1-sparse vector from noisy adaptive measurements"};
  app.require_subcommand(1);

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "Monte Carlo error curves, written as CSV");
  run_cmd->add_option("--n", run.n, "Dimension (power of 2)");
  run_cmd->add_option("--m", run.m, "Measurement budget");
  run_cmd->add_option("--mu", run.mu, "Amplitude grid start:stop:step or comma list")->required();
  run_cmd->add_option("--trials", run.trials, "Trials per grid point");
  run_cmd->add_option("--strategies", run.strategies, "Comma list of cbs, omp, two_stage");
  run_cmd->add_option("--seed", run.seed, "Master seed");
  run_cmd->add_option("--out", run.out, "Output CSV path, - for stdout");
  run_cmd->add_option("--noise-sd", run.noise_sd, "Noise standard deviation");
  run_cmd->add_option("--confidence", run.confidence, "Wilson interval level");
  run_cmd->add_option("--locate-fraction", run.locate_fraction, "Budget share used for locating (two_stage)");
  run_cmd->add_option("--workers", run.workers, "Worker threads (0 = all cores); output is identical");

  BoundsFlags bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "Print thresholds and error bounds");
  bounds_cmd->add_option("--n", bounds.n, "Dimension (power of 2)");
  bounds_cmd->add_option("--m", bounds.m, "Measurement budget");
  bounds_cmd->add_option("--mu", bounds.mu, "Amplitudes start:stop:step or comma list");
  bounds_cmd->add_option("--target-pe", bounds.target_pe, "Print the amplitude at which the upper bound equals this");

  Fig1Flags fig1;
  auto* fig1_cmd = app.add_subcommand("reproduce-fig1", "Binary search vs OMP at n=4096, m=256, mu in 0..14");
  fig1_cmd->add_option("--trials", fig1.trials, "Trials per grid point");
  fig1_cmd->add_option("--seed", fig1.seed, "Master seed");
  fig1_cmd->add_option("--out-prefix", fig1.out_prefix, "Writes <prefix>.csv and <prefix>.svg");
  fig1_cmd->add_option("--workers", fig1.workers, "Worker threads (0 = all cores); output is identical");

  std::string plot_in, plot_out;
  auto* plot_cmd = app.add_subcommand("plot", "Render a harness CSV as SVG");
  plot_cmd->add_option("--in", plot_in, "Input CSV")->required();
  plot_cmd->add_option("--out", plot_out, "Output SVG")->required();

  bool fast = false;
  auto* selftest_cmd = app.add_subcommand("selftest", "Check the library's deterministic properties");
  selftest_cmd->add_flag("--fast", fast, "Smaller property grids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (*run_cmd) return cmd_run(run);
  if (*bounds_cmd) return cmd_bounds(bounds);
  if (*fig1_cmd) return cmd_reproduce_fig1(fig1);
  if (*plot_cmd) return cmd_plot(plot_in, plot_out);
  if (*selftest_cmd) return cmd_selftest(fast);
  return kExitUsage;
}
