// snls: ensemble runs, validation oracles, rate fits on stored trajectories,
// ground-state export.
//
// Exit codes: 0 all hard assertions passed, 1 an assertion failed, 2 usage,
// configuration or I/O error.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snls/config.hpp"
#include "snls/diagnostics.hpp"
#include "snls/ensemble.hpp"
#include "snls/error.hpp"
#include "snls/evolve.hpp"
#include "snls/ground_state.hpp"
#include "snls/oracles.hpp"
#include "snls/path.hpp"
#include "snls/rate_fit.hpp"
#include "snls/report.hpp"

namespace {

using nlohmann::json;
using namespace snls;

constexpr double kMassTolerance = 1e-10;

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) return {std::stoull(text)};
    const auto a = std::stoull(text.substr(0, dots));
    const auto b = std::stoull(text.substr(dots + 2));
    if (b < a) throw Error(Errc::invalid_argument, "empty seed range " + text);
    std::vector<std::uint64_t> out;
    for (auto s = a; s <= b; ++s) out.push_back(s);
    return out;
  } catch (const std::logic_error&) {
    throw Error(Errc::invalid_argument, "seed range must look like a..b, got " + text);
  }
}

int cmd_run(const std::string& config_path, std::string out, const std::string& seeds_text,
            int workers, bool checkpoints) {
  SimConfig cfg = parse_config(config_path);
  if (workers > 0) cfg.ensemble.workers = workers;
  if (out.empty()) {
    const char* env = std::getenv("SNLS_OUT_DIR");
    out = env && *env ? env : cfg.output.directory;
  }
  std::vector<std::uint64_t> seeds = seeds_text.empty() ? ensemble_seeds(cfg) : parse_seed_range(seeds_text);
  if (!seeds_text.empty()) {
    cfg.ensemble.n_paths = static_cast<int>(seeds.size());
    cfg.ensemble.base_seed = seeds.front();
  }
  validate(cfg);

  const EnsembleResult res = run_ensemble(cfg, seeds, cfg.ensemble.workers);
  ReportOptions ropts;
  ropts.workers = cfg.ensemble.workers;
  emit_report(out, cfg, res, ropts);
  if (checkpoints) {
    for (const auto& rec : res.records) {
      if (rec.stop == StopReason::path_rejected || rec.final_state.X.values.empty()) continue;
      save_checkpoint(rec.final_state,
                      std::filesystem::path(out) / "paths" / ("path_" + std::to_string(rec.seed) + ".ckpt"));
    }
  }

  const auto& s = res.summary;
  std::printf("paths %d  blowup %d  horizon %d  rejected %d  numeric_failure %d\n", s.n_paths,
              s.n_blowup, s.n_horizon, s.n_rejected, s.n_numeric_failure);
  std::printf("blowup fraction %.4f  (95%% CI %.4f..%.4f)  median p %.4f\n", s.blowup_fraction,
              s.blowup_ci.low, s.blowup_ci.high, s.median_p);
  std::printf("output: %s\n", out.c_str());

  bool ok = s.n_blowup + s.n_horizon + s.n_rejected + s.n_numeric_failure == s.n_paths;
  for (const auto& rec : res.records) {
    if (rec.stop != StopReason::path_rejected && rec.max_mass_drift >= kMassTolerance) {
      std::fprintf(stderr, "seed %llu: relative mass drift %.3g exceeds %.0e\n",
                   static_cast<unsigned long long>(rec.seed), rec.max_mass_drift, kMassTolerance);
      ok = false;
    }
  }
  return ok ? 0 : 1;
}

bool run_oracle(const std::string& name, json& out) {
  if (name == "soliton") {
    const auto r = soliton_oracle();
    const bool pass = r.error < 1e-5 && std::abs(r.order - 2.0) <= 0.2;
    out = {{"case", name},          {"error", jnum(r.error)},     {"order", jnum(r.order)},
           {"mass_drift", jnum(r.mass_drift)}, {"ladder_differences", r.ladder_differences},
           {"pass", pass}};
    return pass;
  }
  if (name == "pconf") {
    const auto r = pconf_oracle();
    const double p = r.fit.free.p;
    const bool pass = r.relative_error < 1e-3 && r.regrids >= 1 && r.fit.free.ok &&
                      std::abs(p - 1.0) <= 0.05;
    out = {{"case", name},
           {"relative_error", jnum(r.relative_error)},
           {"regrids", r.regrids},
           {"final_n", r.final_n},
           {"t_reached", jnum(r.t_reached)},
           {"p", jnum(p)},
           {"T", jnum(r.fit.free.T)},
           {"mass_drift", jnum(r.mass_drift)},
           {"pass", pass}};
    return pass;
  }
  if (name == "noise-identity") {
    const auto r = noise_identity_oracle();
    const bool pass = r.sup_error < 1e-12;
    out = {{"case", name}, {"sup_error", jnum(r.sup_error)}, {"steps", r.steps},
           {"t_end", jnum(r.t_end)}, {"pass", pass}};
    return pass;
  }
  throw Error(Errc::invalid_argument, "unknown oracle case " + name);
}

int cmd_oracle(const std::string& which) {
  std::vector<std::string> cases;
  if (which == "all") {
    cases = {"soliton", "pconf", "noise-identity"};
  } else {
    cases = {which};
  }
  bool ok = true;
  json all = json::array();
  for (const auto& c : cases) {
    json r;
    ok = run_oracle(c, r) && ok;
    all.push_back(r);
  }
  std::cout << (cases.size() == 1 ? all[0] : all).dump(2) << '\n';
  return ok ? 0 : 1;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

int cmd_fit(const std::string& traj, double lambda_hi, double lambda_lo) {
  std::ifstream in(traj);
  if (!in) throw Error(Errc::io_error, "cannot read " + traj);
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::parse_error, "empty trajectory file");
  const auto header = split_csv_line(line);
  int col_t = -1, col_l = -1, col_r = -1, dim = 0;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    if (header[i] == "t") col_t = i;
    if (header[i] == "lambda") col_l = i;
    if (header[i] == "residual_max") col_r = i;
    if (header[i].rfind("x_c", 0) == 0) ++dim;
  }
  if (col_t < 0 || col_l < 0 || col_r < 0 || dim < 1 || dim > 2) {
    throw Error(Errc::parse_error, "not a trajectory CSV: " + traj);
  }
  // Only rows whose decomposition met the Newton tolerance enter the fit.
  const double q_mass = reference_ground_state(dim).mass;
  std::vector<RatePoint> pts;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(Errc::parse_error, "line " + std::to_string(lineno) + ": wrong column count");
    }
    const double res = std::strtod(cells[col_r].c_str(), nullptr);
    if (!(std::isfinite(res) && res < 1e-8 * q_mass)) continue;
    pts.push_back({std::strtod(cells[col_t].c_str(), nullptr),
                   std::strtod(cells[col_l].c_str(), nullptr)});
  }
  const RateFit f = fit_blowup_rate(pts, lambda_hi, lambda_lo);
  auto model = [](const ModelFit& m) {
    return json{{"ok", m.ok}, {"T", jnum(m.T)}, {"C", jnum(m.C)}, {"p", jnum(m.p)},
                {"residual", jnum(m.residual)}, {"note", m.note}};
  };
  const json out = {
      {"T", jnum(f.free.T)},
      {"C", jnum(f.free.C)},
      {"p", jnum(f.free.p)},
      {"residuals",
       {{"power_law", jnum(f.power_law.residual)}, {"loglog", jnum(f.loglog.residual)},
        {"free", jnum(f.free.residual)}}},
      {"models", {{"power_law", model(f.power_law)}, {"loglog", model(f.loglog)}, {"free", model(f.free)}}},
      {"window",
       {{"lambda_hi", lambda_hi}, {"lambda_lo", lambda_lo}, {"t_a", f.t_a}, {"t_b", f.t_b},
        {"samples", f.samples}}},
      {"flags",
       {{"p_in_band", f.free.ok && f.free.p >= 0.4 && f.free.p <= 0.6},
        {"loglog_not_worse", f.loglog_not_worse()}}}};
  std::cout << out.dump(2) << '\n';
  return f.free.ok ? 0 : 1;
}

int cmd_groundstate(int dim, const std::string& out) {
  const GroundState gs = reference_ground_state(dim);
  const double res = dim == 1 ? profile_residual(gs) : elliptic_residual(gs, gs.grid.half_width / 2);
  const json j = {{"dimension", dim},
                  {"mass", gs.mass},
                  {"gradnorm", gs.gradnorm},
                  {"energy", energy(gs.as_complex())},
                  {"central_value", gs.central_value},
                  {"residual", jnum(res)},
                  {"grid", {{"half_width", gs.grid.half_width}, {"n", gs.grid.n}}}};
  std::cout << j.dump(2) << '\n';
  if (!out.empty()) write_profile_csv(*gs.profile, 20.0, 2001, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral simulator for the mass-critical NLS with conservative noise"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seeds_text;
  int workers = 0;
  bool checkpoints = false;
  auto* run = app.add_subcommand("run", "Run an ensemble of noise paths");
  run->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (default: $SNLS_OUT_DIR, then output.directory)");
  run->add_option("--seeds", seeds_text, "Seed range a..b (inclusive), overrides the ensemble section");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--checkpoints", checkpoints, "Write the final state of every path");

  std::string oracle_case = "all";
  auto* oracle = app.add_subcommand("oracle", "Deterministic validation cases");
  oracle->add_option("--case", oracle_case, "soliton | pconf | noise-identity | all")
      ->check(CLI::IsMember({"soliton", "pconf", "noise-identity", "all"}));

  std::string traj;
  double lambda_hi = FitConfig{}.lambda_hi;
  double lambda_lo = FitConfig{}.lambda_lo;
  auto* fit = app.add_subcommand("fit", "Blow-up rate fit on a stored trajectory CSV");
  fit->add_option("--traj", traj, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--lambda-hi", lambda_hi, "Upper end of the fit window");
  fit->add_option("--lambda-lo", lambda_lo, "Lower end of the fit window");

  int gs_dim = 1;
  std::string gs_out;
  auto* gs = app.add_subcommand("groundstate", "Ground state summary and radial profile");
  gs->add_option("--d", gs_dim, "Dimension")->check(CLI::IsMember({1, 2}));
  gs->add_option("--out", gs_out, "Write the profile as CSV (r,Q)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, seeds_text, workers, checkpoints);
    if (*oracle) return cmd_oracle(oracle_case);
    if (*fit) return cmd_fit(traj, lambda_hi, lambda_lo);
    if (*gs) return cmd_groundstate(gs_dim, gs_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "snls: %s\n", e.what());
    return 2;
  }
  return 2;
}
