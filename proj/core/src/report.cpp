#include "snls/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "snls/error.hpp"
#include "snls/noise.hpp"

namespace snls {
namespace {

using nlohmann::json;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw Error(Errc::io_error, "write failed: " + path.string());
}

std::string join(const std::vector<std::string>& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  return out;
}

std::vector<std::string> axis_columns(const std::string& stem, int dim) {
  if (dim == 1) return {stem};
  return {stem + "_1", stem + "_2"};
}

json model_json(const ModelFit& m) {
  json j;
  j["ok"] = m.ok;
  j["T"] = jnum(m.T);
  j["C"] = jnum(m.C);
  j["p"] = jnum(m.p);
  j["residual"] = jnum(m.residual);
  j["note"] = m.note;
  return j;
}

json constraints_json(const ConstraintReport& c) {
  json j;
  j["b_positive"] = c.b_positive;
  j["smallness"] = c.smallness;
  j["eps_l2"] = jnum(c.eps_l2);
  j["lambda_bound"] = c.lambda_bound;
  j["log_lambda0"] = jnum(c.log_lambda0);
  j["log_lambda_bound"] = jnum(c.log_lambda_bound);
  j["weighted_bound"] = c.weighted_bound;
  j["eps_weighted"] = jnum(c.eps_weighted);
  j["log_weighted_bound"] = jnum(c.log_weighted_bound);
  j["energy_bound"] = c.energy_bound;
  j["energy"] = jnum(c.energy);
  j["momentum_bound"] = c.momentum_bound;
  j["momentum"] = jnum(c.momentum);
  j["all"] = c.all();
  return j;
}

json monitors_json(const PathSummary& p) {
  json j;
  j["window_rows"] = p.window_rows;
  j["valid_fraction"] = jnum(p.valid_fraction);
  j["b_in_range"] = p.b_in_range;
  j["monotone_3_2"] = p.monotone_3_2;
  j["monotone_5_4"] = p.monotone_5_4;
  j["pass_b_positive"] = jnum(p.pass_b_positive);
  j["pass_below_alpha"] = jnum(p.pass_below_alpha);
  j["pass_below_half_alpha"] = jnum(p.pass_below_half_alpha);
  j["pass_monotone_3_2"] = jnum(p.pass_monotone_3_2);
  j["pass_lambda_bound"] = jnum(p.pass_lambda_bound);
  j["pass_weighted_bound"] = jnum(p.pass_weighted_bound);
  j["dyadic_constant"] = jnum(p.dyadic_constant);
  j["energy_slope"] = jnum(p.energy_slope);
  j["momentum_slope"] = jnum(p.momentum_slope);
  if (p.drift) {
    j["drift_energy_ratio"] = jnum(p.drift->sup_energy_ratio);
    j["drift_momentum_ratio"] = jnum(p.drift->sup_momentum_ratio);
  }
  return j;
}

json path_json(const PathSummary& p) {
  json j;
  j["seed"] = p.seed;
  j["stop"] = to_string(p.stop);
  j["stop_detail"] = p.stop_detail;
  j["samples"] = p.samples;
  j["steps"] = p.steps;
  j["t_final"] = jnum(p.t_final);
  j["lambda_final"] = jnum(p.lambda_final);
  j["final_n"] = p.final_n;
  j["refinements"] = p.refinements;
  j["max_mass_drift"] = jnum(p.max_mass_drift);
  j["T_fit"] = p.fit && p.fit->free.ok ? jnum(p.fit->free.T) : json(nullptr);
  j["p_fit"] = p.fit && p.fit->free.ok ? jnum(p.fit->free.p) : json(nullptr);
  j["residual_ratio"] = p.fit ? jnum(p.residual_ratio) : json(nullptr);
  j["fit_error"] = p.fit_error;
  j["monitors"] = monitors_json(p);
  j["path_bound"] = {{"ok", p.path_bound.ok},
                     {"worst", jnum(p.path_bound.worst)},
                     {"worst_time", jnum(p.path_bound.worst_time)}};
  if (p.has_constraints) j["constraints"] = constraints_json(p.constraints);
  return j;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<std::string> trajectory_columns(int dim) {
  std::vector<std::string> c{"t", "s", "lambda", "b"};
  for (auto& x : axis_columns("x_c", dim)) c.push_back(x);
  for (const char* x : {"gamma", "eps_l2", "eps_weighted", "residual_max", "valid"}) c.push_back(x);
  return c;
}

std::vector<std::string> diagnostics_columns(int dim) {
  std::vector<std::string> c{"t", "mass", "energy"};
  for (auto& x : axis_columns("momentum", dim)) c.push_back(x);
  for (const char* x : {"h1", "lambda_est", "drift_budget", "grid_n", "lambda2_energy",
                        "lambda_momentum", "gamma_b", "converged"}) {
    c.push_back(x);
  }
  return c;
}

std::vector<std::string> aggregate_columns() {
  return {"t", "median_inv_lambda", "q25_inv_lambda", "q75_inv_lambda", "n_active"};
}

void write_trajectory_csv(const TrajectoryRecord& rec, int dim, const std::filesystem::path& path) {
  std::ostringstream os;
  os << join(trajectory_columns(dim)) << '\n';
  // Rows without a converged decomposition carry lambda_est and nan modulation fields.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rec.rows) {
    const auto m = [&](double v) { return num(r.converged ? v : nan); };
    os << num(r.t) << ',' << num(r.s) << ',' << num(r.lambda) << ',' << m(r.b);
    for (int a = 0; a < dim; ++a) os << ',' << m(r.x_c[a]);
    os << ',' << m(r.gamma) << ',' << m(r.eps_l2) << ',' << m(r.eps_weighted) << ','
       << m(r.residual_max) << ',' << (r.valid ? 1 : 0) << '\n';
  }
  write_text(path, os.str());
}

void write_diagnostics_csv(const TrajectoryRecord& rec, int dim, const std::filesystem::path& path) {
  std::ostringstream os;
  os << join(diagnostics_columns(dim)) << '\n';
  for (const auto& r : rec.rows) {
    os << num(r.t) << ',' << num(r.mass) << ',' << num(r.energy);
    for (int a = 0; a < dim; ++a) {
      os << ',' << num(a < static_cast<int>(r.momentum.size()) ? r.momentum[a] : 0.0);
    }
    os << ',' << num(r.h1) << ',' << num(r.lambda_est) << ',' << num(r.drift_budget) << ','
       << r.grid_n << ',' << num(r.lambda2_energy()) << ',' << num(r.lambda_momentum()) << ','
       << num(r.gamma_b()) << ',' << (r.converged ? 1 : 0) << '\n';
  }
  write_text(path, os.str());
}

void write_fit_json(const PathSummary& p, const FitConfig& fit, const std::filesystem::path& path) {
  json j;
  json window;
  window["lambda_hi"] = fit.lambda_hi;
  window["lambda_lo"] = fit.lambda_lo;
  if (p.fit) {
    const auto& f = *p.fit;
    j["T"] = jnum(f.free.T);
    j["C"] = jnum(f.free.C);
    j["p"] = jnum(f.free.p);
    j["residuals"] = {{"power_law", jnum(f.power_law.residual)},
                      {"loglog", jnum(f.loglog.residual)},
                      {"free", jnum(f.free.residual)}};
    j["models"] = {{"power_law", model_json(f.power_law)},
                   {"loglog", model_json(f.loglog)},
                   {"free", model_json(f.free)}};
    window["t_a"] = jnum(f.t_a);
    window["t_b"] = jnum(f.t_b);
    window["samples"] = f.samples;
  } else {
    j["T"] = nullptr;
    j["C"] = nullptr;
    j["p"] = nullptr;
    j["residuals"] = nullptr;
    j["error"] = p.fit_error;
  }
  j["window"] = window;
  json flags;
  flags["p_in_band"] = p.fit && p.fit->free.ok && p.fit->free.p >= 0.4 && p.fit->free.p <= 0.6;
  flags["loglog_not_worse"] = p.fit && p.fit->loglog_not_worse();
  flags["b_in_range"] = p.b_in_range;
  flags["monotone_3_2"] = p.monotone_3_2;
  flags["monotone_5_4"] = p.monotone_5_4;
  flags["blowup"] = p.blowup();
  j["flags"] = flags;
  j["seed"] = p.seed;
  write_text(path, j.dump(2) + "\n");
}

std::string summary_json(const EnsembleSummary& s, const SimConfig& cfg) {
  json j;
  j["n_paths"] = s.n_paths;
  j["n_blowup"] = s.n_blowup;
  j["n_horizon"] = s.n_horizon;
  j["n_rejected"] = s.n_rejected;
  j["n_numeric_failure"] = s.n_numeric_failure;
  j["blowup_fraction"] = jnum(s.blowup_fraction);
  j["blowup_ci95"] = {jnum(s.blowup_ci.low), jnum(s.blowup_ci.high)};
  j["n_fit"] = s.n_fit;
  j["median_p"] = jnum(s.median_p);
  j["loglog_not_worse_fraction"] = jnum(s.loglog_not_worse_fraction);
  j["dimension"] = cfg.grid.dim;
  j["base_seed"] = cfg.ensemble.base_seed;
  j["fit_window"] = {{"lambda_hi", cfg.fit.lambda_hi}, {"lambda_lo", cfg.fit.lambda_lo}};
  json paths = json::array();
  for (const auto& p : s.paths) paths.push_back(path_json(p));
  j["paths"] = paths;
  return j.dump(2) + "\n";
}

std::vector<AggregateRow> aggregate_inverse_lambda(const std::vector<TrajectoryRecord>& records,
                                                   int points) {
  std::vector<AggregateRow> out;
  double t0 = std::numeric_limits<double>::infinity();
  double t1 = -std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    if (r.rows.empty()) continue;
    t0 = std::min(t0, r.rows.front().t);
    t1 = std::max(t1, r.rows.back().t);
  }
  if (!(t1 >= t0) || points < 2) return out;
  for (int i = 0; i < points; ++i) {
    AggregateRow row;
    row.t = t0 + (t1 - t0) * i / (points - 1);
    std::vector<double> inv;
    for (const auto& r : records) {
      const auto& rows = r.rows;
      if (rows.empty() || row.t < rows.front().t || row.t > rows.back().t) continue;
      auto it = std::lower_bound(rows.begin(), rows.end(), row.t,
                                 [](const TrajectoryRow& a, double t) { return a.t < t; });
      double lam;
      if (it == rows.begin()) {
        lam = it->lambda;
      } else {
        const auto& a = *(it - 1);
        const auto& b = *it;
        const double w = b.t > a.t ? (row.t - a.t) / (b.t - a.t) : 1.0;
        lam = a.lambda + w * (b.lambda - a.lambda);
      }
      if (lam > 0.0) inv.push_back(1.0 / lam);
    }
    row.active = static_cast<int>(inv.size());
    if (!inv.empty()) {
      std::sort(inv.begin(), inv.end());
      row.median = quantile(inv, 0.5);
      row.q25 = quantile(inv, 0.25);
      row.q75 = quantile(inv, 0.75);
    } else {
      row.median = row.q25 = row.q75 = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(row);
  }
  return out;
}

void emit_report(const std::filesystem::path& dir, const SimConfig& cfg,
                 const EnsembleResult& result, const ReportOptions& opts) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "paths", ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + (dir / "paths").string() + ": " + ec.message());

  const int dim = cfg.grid.dim;
  const auto& paths = result.summary.paths;
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& rec = result.records[i];
    const std::string stem = "path_" + std::to_string(rec.seed);
    if (cfg.output.trajectories) {
      write_trajectory_csv(rec, dim, dir / "paths" / (stem + "_trajectory.csv"));
      write_diagnostics_csv(rec, dim, dir / "paths" / (stem + "_diagnostics.csv"));
    }
    if (i < paths.size()) write_fit_json(paths[i], cfg.fit, dir / "paths" / (stem + "_fit.json"));
    if (cfg.output.brownian && rec.stop != StopReason::path_rejected) {
      std::vector<double> times;
      const auto nodes = static_cast<long>(std::floor(cfg.time.horizon / cfg.time.base_dt));
      for (long k = 0; k <= nodes; ++k) times.push_back(k * cfg.time.base_dt);
      const auto noise = sample_brownian(cfg.noise.family(dim), times, rec.seed, cfg.time.base_dt);
      write_brownian_csv(noise, dir / "paths" / (stem + "_brownian.csv"));
    }
  }

  std::ostringstream agg;
  agg << join(aggregate_columns()) << '\n';
  for (const auto& r : aggregate_inverse_lambda(result.records)) {
    agg << num(r.t) << ',' << num(r.median) << ',' << num(r.q25) << ',' << num(r.q75) << ','
        << r.active << '\n';
  }
  write_text(dir / "aggregate.csv", agg.str());
  write_text(dir / "config.snls", serialize_config(cfg));

  json manifest;
  manifest["created_utc"] = opts.timestamp.empty() ? utc_now() : opts.timestamp;
  manifest["workers"] = opts.workers;
  manifest["base_seed"] = cfg.ensemble.base_seed;
  json seeds = json::array();
  for (const auto& rec : result.records) seeds.push_back(rec.seed);
  manifest["seeds"] = seeds;
  write_text(dir / "seeds.json", manifest.dump(2) + "\n");

  write_text(dir / "summary.json", summary_json(result.summary, cfg));
}

}  // namespace snls
