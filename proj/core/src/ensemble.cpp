#include "snls/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "snls/error.hpp"

namespace snls {

Interval wilson_interval(int k, int n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = n;
  const double p = k / nn;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::vector<TrajectoryRow> fit_window_rows(const std::vector<TrajectoryRow>& rows,
                                           const FitConfig& fit) {
  std::vector<TrajectoryRow> out;
  for (const auto& r : rows) {
    if (r.converged && r.lambda <= fit.lambda_hi && r.lambda >= fit.lambda_lo) out.push_back(r);
  }
  return out;
}

PathSummary summarize_path(const TrajectoryRecord& rec, const SimConfig& cfg) {
  PathSummary s;
  s.seed = rec.seed;
  s.stop = rec.stop;
  s.stop_detail = rec.stop_detail;
  s.samples = static_cast<int>(rec.rows.size());
  s.steps = rec.steps;
  s.max_mass_drift = rec.max_mass_drift;
  s.has_constraints = rec.has_constraints;
  s.constraints = rec.constraints;
  s.path_bound = rec.path_bound;
  s.final_n = rec.final_state.X.grid.n;
  s.refinements = rec.final_state.refinement_level;
  if (!rec.rows.empty()) {
    s.t_final = rec.rows.back().t;
    s.lambda_final = rec.rows.back().lambda;
  }
  if (rec.rows.size() >= 2) s.drift = check_energy_drift(rec.rows);

  std::vector<RatePoint> pts;
  for (const auto& r : rec.rows) {
    if (r.converged) pts.push_back({r.t, r.lambda});
  }
  try {
    s.fit = fit_blowup_rate(pts, cfg.fit.lambda_hi, cfg.fit.lambda_lo);
    if (s.fit->loglog.ok && s.fit->power_law.ok && s.fit->power_law.residual > 0.0) {
      s.residual_ratio = s.fit->loglog.residual / s.fit->power_law.residual;
    }
  } catch (const Error& e) {
    s.fit_error = e.what();
  }

  const auto window = fit_window_rows(rec.rows, cfg.fit);
  s.window_rows = static_cast<int>(window.size());
  if (window.empty()) return s;

  const double alpha = cfg.thresholds.alpha;
  s.b_in_range = std::all_of(window.begin(), window.end(),
                             [&](const auto& r) { return r.b > 0.0 && r.b < alpha; });
  s.monotone_3_2 = true;
  s.monotone_5_4 = true;
  double later = 0.0;
  for (std::size_t i = window.size(); i-- > 0;) {
    later = std::max(later, window[i].lambda);
    if (later > 1.5 * window[i].lambda) s.monotone_3_2 = false;
    if (later > 1.25 * window[i].lambda) s.monotone_5_4 = false;
  }

  const BootstrapReport boot = bootstrap_monitor(window, alpha);
  const double n = static_cast<double>(window.size());
  int valid = 0;
  int bp = 0, ba = 0, bh = 0, m32 = 0, lb = 0, wb = 0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (window[i].valid) ++valid;
    const auto& f = boot.flags[i];
    bp += f.b_positive;
    ba += f.below_alpha;
    bh += f.below_half_alpha;
    m32 += f.monotone_3_2;
    lb += f.lambda_bound;
    wb += f.weighted_bound;
  }
  s.valid_fraction = valid / n;
  s.pass_b_positive = bp / n;
  s.pass_below_alpha = ba / n;
  s.pass_below_half_alpha = bh / n;
  s.pass_monotone_3_2 = m32 / n;
  s.pass_lambda_bound = lb / n;
  s.pass_weighted_bound = wb / n;
  s.dyadic_constant = boot.fitted_constant;

  const LambdaEReport le = lambda_e_monitor(window);
  s.energy_slope = le.energy_slope;
  s.momentum_slope = le.momentum_slope;
  return s;
}

EnsembleSummary summarize(const std::vector<TrajectoryRecord>& records, const SimConfig& cfg) {
  EnsembleSummary sum;
  sum.n_paths = static_cast<int>(records.size());
  std::vector<double> ps;
  int fits_on_blowup = 0;
  int loglog_ok = 0;
  for (const auto& rec : records) {
    PathSummary p = summarize_path(rec, cfg);
    switch (p.stop) {
      case StopReason::blowup_detected: ++sum.n_blowup; break;
      case StopReason::horizon_reached: ++sum.n_horizon; break;
      case StopReason::numeric_failure: ++sum.n_numeric_failure; break;
      case StopReason::path_rejected: ++sum.n_rejected; break;
    }
    if (p.fit) ++sum.n_fit;
    if (p.blowup() && p.fit) {
      if (p.fit->free.ok) ps.push_back(p.fit->free.p);
      ++fits_on_blowup;
      if (p.fit->loglog_not_worse()) ++loglog_ok;
    }
    sum.paths.push_back(std::move(p));
  }
  const int accepted = sum.n_paths - sum.n_rejected;
  sum.blowup_fraction = accepted > 0 ? static_cast<double>(sum.n_blowup) / accepted : 0.0;
  sum.blowup_ci = wilson_interval(sum.n_blowup, accepted);
  if (!ps.empty()) {
    std::sort(ps.begin(), ps.end());
    const std::size_t m = ps.size() / 2;
    sum.median_p = ps.size() % 2 ? ps[m] : 0.5 * (ps[m - 1] + ps[m]);
  }
  sum.loglog_not_worse_fraction =
      fits_on_blowup > 0 ? static_cast<double>(loglog_ok) / fits_on_blowup : 0.0;
  return sum;
}

std::vector<std::uint64_t> ensemble_seeds(const SimConfig& cfg) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < cfg.ensemble.n_paths; ++i) {
    seeds.push_back(cfg.ensemble.base_seed + static_cast<std::uint64_t>(i));
  }
  return seeds;
}

std::vector<TrajectoryRecord> run_paths(const SimConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                        int workers, const GroundState& gs,
                                        const PathOptions& opts) {
  std::vector<TrajectoryRecord> out(seeds.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        out[i] = run_path(cfg, seeds[i], gs, opts);
      } catch (const std::exception& e) {
        TrajectoryRecord rec;
        rec.seed = seeds[i];
        rec.stop = StopReason::numeric_failure;
        rec.stop_detail = e.what();
        out[i] = std::move(rec);
      }
    }
  };
  const int n = std::clamp(workers, 1, std::max(1, static_cast<int>(seeds.size())));
  if (n == 1) {
    work();
    return out;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < n; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return out;
}

EnsembleResult run_ensemble(const SimConfig& cfg, const std::vector<std::uint64_t>& seeds,
                            int workers) {
  validate(cfg);
  const GroundState gs = reference_ground_state(cfg.grid.dim);
  EnsembleResult res;
  res.records = run_paths(cfg, seeds, workers, gs);
  res.summary = summarize(res.records, cfg);
  return res;
}

EnsembleResult run_ensemble(const SimConfig& cfg) {
  return run_ensemble(cfg, ensemble_seeds(cfg), cfg.ensemble.workers);
}

}  // namespace snls
