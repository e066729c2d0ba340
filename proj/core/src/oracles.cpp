#include "snls/oracles.hpp"

#include <cmath>

#include "snls/error.hpp"
#include "snls/evolve.hpp"
#include "snls/noise.hpp"
#include "snls/path.hpp"

namespace snls {
namespace {

ComplexField evolve_deterministic(ComplexField X, double t_end, double dt) {
  const auto steps = static_cast<long>(std::llround(t_end / dt));
  const double h = t_end / static_cast<double>(steps);
  for (long i = 0; i < steps; ++i) X = strang_step(std::move(X), h);
  return X;
}

double l2_distance(const ComplexField& a, const ComplexField& b) {
  ComplexField diff(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return l2_norm(diff);
}

}  // namespace

SolitonOracleResult soliton_oracle(const SolitonOracleOptions& opts) {
  const Grid grid = make_grid(1, opts.half_width, opts.n);
  const GroundState gs = ground_state_1d(grid);
  const ComplexField q = gs.as_complex();

  SolitonOracleResult res;
  const ComplexField X = evolve_deterministic(q, opts.t_end, opts.dt);
  ComplexField exact = q;
  for (auto& v : exact.values) v *= std::polar(1.0, opts.t_end);
  res.error = l2_distance(X, exact);
  res.mass_drift = std::abs(l2_norm_sq(X) - gs.mass) / gs.mass;

  std::vector<ComplexField> runs;
  for (double dt : opts.ladder) runs.push_back(evolve_deterministic(q, opts.t_end, dt));
  for (std::size_t i = 1; i < runs.size(); ++i) {
    res.ladder_differences.push_back(l2_distance(runs[i - 1], runs[i]));
  }
  const auto& d = res.ladder_differences;
  if (d.size() >= 2) {
    const double ratio = opts.ladder[opts.ladder.size() - 2] / opts.ladder.back();
    res.order = std::log(d[d.size() - 2] / d.back()) / std::log(ratio);
  }
  return res;
}

PconfOracleResult pconf_oracle(const PconfOracleOptions& opts) {
  if (!(opts.t_start < opts.t_end && opts.t_end < 0.0)) {
    throw Error(Errc::invalid_argument, "pseudo-conformal window must satisfy t_start < t_end < 0");
  }
  SimConfig cfg;
  cfg.grid.dim = 1;
  cfg.grid.half_width = opts.half_width;
  cfg.grid.n = opts.n;
  cfg.time.t_start = opts.t_start;
  cfg.time.horizon = opts.t_end - opts.t_start;
  cfg.time.dt0 = opts.dt0;
  cfg.initial.preset = InitialPreset::pseudo_conformal_oracle;
  // No floor or H1 stop before t_end: lambda stays above |t_end|.
  cfg.thresholds.lambda_floor = 1e-3;

  const GroundState gs = reference_ground_state(1);
  PathOptions popts;
  popts.flags.noise = false;
  const TrajectoryRecord rec = run_path(cfg, 1, gs, popts);

  PconfOracleResult res;
  const auto& state = rec.final_state;
  res.regrids = state.refinement_level;
  res.final_n = state.grid().n;
  res.t_reached = rec.rows.empty() ? opts.t_start : rec.rows.back().t;
  res.mass_drift = rec.max_mass_drift;
  const ComplexField S = pseudo_conformal(res.t_reached, *gs.profile, state.grid());
  res.relative_error = l2_distance(state.X, S) / l2_norm(S);

  std::vector<RatePoint> pts;
  for (const auto& row : rec.rows) {
    if (row.converged) pts.push_back({row.t, row.lambda});
  }
  res.fit = fit_blowup_rate(pts, opts.lambda_hi, opts.lambda_lo);
  return res;
}

NoiseIdentityResult noise_identity_oracle(const NoiseIdentityOptions& opts) {
  const Grid grid = make_grid(opts.dim, opts.half_width, opts.n);
  PhiFamily phi;
  phi.dim = opts.dim;
  phi.bumps = {{0.8, {0.0, 0.0}, 1.5}, {0.5, {2.0, -1.0}, 0.8}, {0.3, {-3.0, 1.0}, 2.5}};
  const NoiseRealization noise(phi, opts.base_dt, opts.seed);

  EvolveState state;
  state.X = sample(grid, [](Point x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    return cplx{std::exp(-0.5 * r2), 0.3 * x[0] * std::exp(-0.25 * r2)};
  });
  state.dt = kTicksPerBase >> opts.dt_level;
  const ComplexField X0 = state.X;

  Stepper stepper(noise, StepFlags{false, false, true});
  stepper.advance(state, opts.steps);

  const RealField W = eval_W(noise, state.tick, grid);
  NoiseIdentityResult res;
  for (std::size_t i = 0; i < X0.size(); ++i) {
    const cplx expect = X0[i] * std::polar(1.0, W[i]);
    res.sup_error = std::max(res.sup_error, std::abs(state.X[i] - expect));
  }
  res.t_end = noise.time_of(state.tick);
  res.steps = opts.steps;
  return res;
}

}  // namespace snls
