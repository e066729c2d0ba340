#include "snls/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "snls/error.hpp"

namespace snls {

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::blowup_detected: return "blowup_detected";
    case StopReason::horizon_reached: return "horizon_reached";
    case StopReason::numeric_failure: return "numeric_failure";
    case StopReason::path_rejected: return "path_rejected";
  }
  return "unknown";
}

GroundState reference_ground_state(int dim) {
  if (dim == 1) return ground_state_1d(make_grid(1, 40.0, 4096));
  if (dim == 2) return ground_state_2d(make_grid(2, 16.0, 256));
  throw Error(Errc::invalid_dimension, "dimension must be 1 or 2");
}

ComplexField pseudo_conformal(double t, const RadialProfile& profile, const Grid& grid) {
  if (t == 0.0) throw Error(Errc::invalid_argument, "S(t) is singular at t = 0");
  const double at = std::abs(t);
  const double scale = std::pow(at, -0.5 * grid.dim);
  return sample(grid, [&](Point x) {
    const double r2 = x[0] * x[0] + (grid.dim == 2 ? x[1] * x[1] : 0.0);
    return scale * profile.value(std::sqrt(r2) / at) * std::polar(1.0, -1.0 / t + r2 / (4.0 * t));
  });
}

ComplexField initial_field(const SimConfig& cfg, const GroundState& gs, const Grid& grid,
                           ConstraintReport* report) {
  const auto& ini = cfg.initial;
  switch (ini.preset) {
    case InitialPreset::zero:
      return ComplexField(grid);
    case InitialPreset::soliton_oracle: {
      const cplx rot = std::polar(ini.mass_scale, ini.gamma0);
      return sample(grid, [&](Point x) {
        double r2 = 0.0;
        for (int a = 0; a < grid.dim; ++a) {
          const double d = wrap_displacement(x[a], ini.x0[a], grid.half_width);
          r2 += d * d;
        }
        return rot * gs.profile->value(std::sqrt(r2));
      });
    }
    case InitialPreset::pseudo_conformal_oracle:
      return pseudo_conformal(cfg.time.t_start, *gs.profile, grid);
    case InitialPreset::ansatz: {
      InitialData data = build_initial_data(ini, gs, grid, cfg.thresholds.alpha);
      if (report) *report = data.report;
      return std::move(data.u0);
    }
  }
  throw Error(Errc::invalid_spec, "unknown preset");
}

namespace {

Tick pow2_floor(double v) {
  if (!(v >= 1.0)) return 1;
  const int e = std::min(static_cast<int>(std::floor(std::log2(v))), kMaxLevel);
  return Tick{1} << e;
}

class Sampler {
 public:
  Sampler(const GroundState& gs, const ThresholdConfig& th, bool modulation)
      : gs_(gs), alpha_(th.alpha), modulation_(modulation) {}

  TrajectoryRow sample(const ComplexField& u, double t, double lambda_est) {
    TrajectoryRow row;
    row.t = t;
    row.mass = l2_norm_sq(u);
    row.energy = energy(u);
    row.momentum = momentum(u);
    row.h1 = h1_norm(u);
    row.lambda_est = lambda_est;
    row.grid_n = u.grid.n;
    row.lambda = lambda_est;
    if (modulation_ && row.mass > 0.0) decompose_into(u, row);

    if (have_prev_) {
      const double dt = t - prev_t_;
      s_ += 0.5 * dt * (1.0 / (prev_lambda_ * prev_lambda_) + 1.0 / (row.lambda * row.lambda));
      budget_ += 0.5 * dt * (prev_h1_ * prev_h1_ + row.h1 * row.h1);
    }
    row.s = s_;
    row.drift_budget = budget_;
    have_prev_ = true;
    prev_t_ = t;
    prev_lambda_ = row.lambda;
    prev_h1_ = row.h1;
    return row;
  }

 private:
  void decompose_into(const ComplexField& u, TrajectoryRow& row) {
    DecomposeOptions opts;
    opts.alpha = alpha_;
    ModulationState st;
    bool done = false;
    if (warm_) {
      st = decompose(u, *warm_, gs_, opts);
      done = st.converged;
    }
    if (!done) {
      try {
        st = decompose(u, initial_guess(u, gs_), gs_, opts);
      } catch (const Error&) {
        warm_.reset();
        return;
      }
    }
    if (!st.converged) {
      warm_.reset();
      return;
    }
    warm_ = st.params();
    row.lambda = st.lambda;
    row.b = st.b;
    row.x_c = st.x_c;
    row.gamma = st.gamma;
    row.eps_l2 = st.eps_l2;
    row.eps_weighted = st.eps_weighted;
    row.residual_max = st.residual_max();
    row.converged = true;
    row.valid = st.valid;
  }

  const GroundState& gs_;
  double alpha_;
  bool modulation_;
  std::optional<ModulationParams> warm_;
  bool have_prev_ = false;
  double prev_t_ = 0.0;
  double prev_lambda_ = 1.0;
  double prev_h1_ = 0.0;
  double s_ = 0.0;
  double budget_ = 0.0;
};

}  // namespace

TrajectoryRecord run_path(const SimConfig& cfg, std::uint64_t seed, const GroundState& gs,
                          const PathOptions& opts) {
  TrajectoryRecord rec;
  rec.seed = seed;
  const Grid grid = cfg.make_grid();
  const PhiFamily phi = cfg.noise.family(grid.dim);
  const NoiseRealization noise(phi, cfg.time.base_dt, seed);
  const auto& th = cfg.thresholds;

  if (phi.count() > 0 && opts.flags.noise) {
    rec.path_bound = check_path_bound(noise, cfg.time.horizon, cfg.noise.path_bound, grid);
    if (!rec.path_bound.ok) {
      rec.stop = StopReason::path_rejected;
      rec.stop_detail = "path bound exceeded";
      return rec;
    }
  }

  EvolveState state;
  state.seed = seed;
  state.t_origin = cfg.time.t_start;
  if (cfg.initial.preset == InitialPreset::ansatz) rec.has_constraints = true;
  state.X = initial_field(cfg, gs, grid, rec.has_constraints ? &rec.constraints : nullptr);
  rec.initial_mass = l2_norm_sq(state.X);

  const Tick horizon =
      static_cast<Tick>(std::llround(std::ldexp(cfg.time.horizon / cfg.time.base_dt, kMaxLevel)));
  const double ticks_per_time = std::ldexp(1.0 / cfg.time.base_dt, kMaxLevel);
  Stepper stepper(noise, opts.flags);
  Sampler sampler(gs, th, opts.modulation);
  double grad_sq = gradient_norm_sq(state.X);

  auto lambda_raw = [&] {
    return grad_sq > 0.0 ? std::sqrt(gs.gradnorm / grad_sq) : std::numeric_limits<double>::infinity();
  };
  auto take_sample = [&] {
    const ComplexField u = to_u(state.X, noise, state.tick);
    const double lam = std::clamp(lambda_raw(), th.lambda_floor, 1.0);
    rec.rows.push_back(sampler.sample(u, state.t_origin + noise.time_of(state.tick), lam));
    const double drift = rec.initial_mass > 0.0
                             ? std::abs(rec.rows.back().mass - rec.initial_mass) / rec.initial_mass
                             : 0.0;
    rec.max_mass_drift = std::max(rec.max_mass_drift, drift);
    if (opts.on_sample) opts.on_sample(seed, rec.rows.back());
  };
  auto finish = [&](StopReason r, std::string detail) {
    rec.stop = r;
    rec.stop_detail = std::move(detail);
    rec.final_state = state;
  };

  take_sample();
  while (true) {
    if (state.tick >= horizon) {
      finish(StopReason::horizon_reached, "");
      return rec;
    }
    const double raw = lambda_raw();
    if (raw < th.lambda_floor) {
      finish(StopReason::blowup_detected, "lambda_est below floor");
      return rec;
    }
    const double lam = std::clamp(raw, th.lambda_floor, 1.0);
    while (lam < th.margin * state.grid().dx()) {
      if (state.refinement_level >= th.max_refinements) {
        finish(StopReason::numeric_failure, "resolution exhausted before lambda floor");
        return rec;
      }
      state = refine(state);
    }

    Tick dt = std::min(pow2_floor(cfg.time.dt0 * lam * lam * ticks_per_time), kTicksPerBase);
    while (state.tick % dt != 0) dt /= 2;
    const Tick remaining = horizon - state.tick;
    while (dt > remaining) dt /= 2;
    state.dt = dt;
    const auto steps =
        static_cast<int>(std::min<Tick>(cfg.time.sample_every, remaining / dt));
    try {
      grad_sq = stepper.advance(state, steps);
    } catch (const Error& e) {
      finish(StopReason::numeric_failure, e.what());
      return rec;
    }
    rec.steps += steps;
    take_sample();
    const auto& row = rec.rows.back();
    if (!std::isfinite(row.h1) || !std::isfinite(row.mass)) {
      finish(StopReason::numeric_failure, "non-finite sample");
      return rec;
    }
    if (row.h1 > th.h1_blowup) {
      finish(StopReason::blowup_detected, "H1 norm above threshold");
      return rec;
    }
  }
}

}  // namespace snls
