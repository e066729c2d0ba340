#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snls/config.hpp"
#include "snls/diagnostics.hpp"
#include "snls/path.hpp"
#include "snls/rate_fit.hpp"

namespace snls {

struct PathSummary {
  std::uint64_t seed = 0;
  StopReason stop = StopReason::horizon_reached;
  std::string stop_detail;
  int samples = 0;
  long long steps = 0;
  double t_final = 0.0;
  double lambda_final = 0.0;
  int final_n = 0;
  int refinements = 0;
  double max_mass_drift = 0.0;

  std::optional<RateFit> fit;
  std::string fit_error;
  double residual_ratio = 0.0;  // loglog residual / power-law residual

  // Monitors over the fit window (converged rows with lambda_lo <= lambda <= lambda_hi).
  int window_rows = 0;
  double valid_fraction = 0.0;
  bool b_in_range = false;    // 0 < b < alpha on every window row
  bool monotone_3_2 = false;  // lambda(t') <= 3/2 lambda(t) for t <= t' in the window
  bool monotone_5_4 = false;
  double pass_b_positive = 0.0;  // fractions of window rows passing each flag
  double pass_below_alpha = 0.0;
  double pass_below_half_alpha = 0.0;
  double pass_monotone_3_2 = 0.0;
  double pass_lambda_bound = 0.0;
  double pass_weighted_bound = 0.0;
  double dyadic_constant = 0.0;
  double energy_slope = 0.0;
  double momentum_slope = 0.0;
  std::optional<DriftReport> drift;

  bool has_constraints = false;
  ConstraintReport constraints;
  PathBoundReport path_bound;

  bool blowup() const { return stop == StopReason::blowup_detected; }
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for k successes in n trials (z = 1.96 by default).
Interval wilson_interval(int k, int n, double z = 1.959963984540054);

struct EnsembleSummary {
  int n_paths = 0;
  int n_blowup = 0;
  int n_horizon = 0;
  int n_rejected = 0;
  int n_numeric_failure = 0;
  double blowup_fraction = 0.0;  // over non-rejected paths
  Interval blowup_ci;
  int n_fit = 0;
  double median_p = 0.0;
  double loglog_not_worse_fraction = 0.0;  // over blow-up paths with a fit
  std::vector<PathSummary> paths;
};

/// Rows of the fit window: converged and lambda within [lambda_lo, lambda_hi].
std::vector<TrajectoryRow> fit_window_rows(const std::vector<TrajectoryRow>& rows,
                                           const FitConfig& fit);

PathSummary summarize_path(const TrajectoryRecord& rec, const SimConfig& cfg);
EnsembleSummary summarize(const std::vector<TrajectoryRecord>& records, const SimConfig& cfg);

/// Seeds base_seed + i for i in [0, n_paths).
std::vector<std::uint64_t> ensemble_seeds(const SimConfig& cfg);

/// Runs one path per seed on a pool of `workers` threads. Results are ordered
/// by seed index, independent of scheduling. A failing path is recorded as
/// numeric_failure and never aborts its siblings.
std::vector<TrajectoryRecord> run_paths(const SimConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                        int workers, const GroundState& gs,
                                        const PathOptions& opts = {});

struct EnsembleResult {
  std::vector<TrajectoryRecord> records;
  EnsembleSummary summary;
};

EnsembleResult run_ensemble(const SimConfig& cfg, const std::vector<std::uint64_t>& seeds,
                            int workers);
EnsembleResult run_ensemble(const SimConfig& cfg);

}  // namespace snls
