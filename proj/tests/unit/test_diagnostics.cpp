#include <doctest.h>

#include <cmath>
#include <random>

#include "snls/config.hpp"
#include "snls/diagnostics.hpp"
#include "snls/error.hpp"
#include "snls/ground_state.hpp"
#include "snls/path.hpp"
#include "snls/rate_fit.hpp"

using namespace snls;

namespace {

ComplexField test_field(const Grid& g, double lambda) {
  // lambda^{-1/2} f(x / lambda) for a non-symmetric complex f.
  return sample(g, [&](Point p) {
    const double x = p[0] / lambda;
    return std::exp(-x * x) * (1.0 + 0.5 * x) * std::exp(cplx{0.0, 0.3 * x}) / std::sqrt(lambda);
  });
}

TrajectoryRow row(double t, double lambda, double b) {
  TrajectoryRow r;
  r.t = t;
  r.lambda = lambda;
  r.b = b;
  r.valid = true;
  r.converged = true;
  return r;
}

std::vector<RatePoint> rate_series(double (*model)(double, double, double), double T, double C,
                                   double noise, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, noise);
  std::vector<RatePoint> pts;
  for (int i = 0; i <= 400; ++i) {
    const double tau = std::pow(10.0, -1.0 - 7.0 * i / 400.0);
    const double t = T - tau;
    pts.push_back({t, model(t, T, C) * (1.0 + nd(rng))});
  }
  return pts;
}

SimConfig quiet_soliton(double scale) {
  SimConfig cfg;
  cfg.grid = {1, 20.0, 512};
  cfg.noise.bumps.clear();
  cfg.initial.preset = InitialPreset::soliton_oracle;
  cfg.initial.mass_scale = scale;
  cfg.time.horizon = 1.0;
  cfg.time.sample_every = 10;
  return cfg;
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("energy") {
  const Grid g = make_grid(1, 20.0, 1024);
  CHECK(energy(ComplexField(g)) == 0.0);
  CHECK(std::abs(energy(ground_state(g).as_complex())) < 1e-9);

  const double e1 = energy(test_field(g, 1.0));
  for (double lam : {0.5, 0.8, 1.7}) {
    CHECK(energy(test_field(g, lam)) * lam * lam == doctest::Approx(e1).epsilon(1e-8));
  }
  const Grid g2 = make_grid(2, 10.0, 128);
  auto f2 = [&](double lam) {
    return sample(g2, [&](Point p) {
      const double x = p[0] / lam, y = p[1] / lam;
      return 1.5 * std::exp(-x * x - 0.5 * y * y) * std::exp(cplx{0.0, 0.2 * x - 0.1 * y}) / lam;
    });
  };
  CHECK(energy(f2(0.6)) * 0.36 == doctest::Approx(energy(f2(1.0))).epsilon(1e-8));
}

TEST_CASE("momentum") {
  const GroundState gs = ground_state(make_grid(1, 20.0, 1024));
  const Grid& g = gs.grid;
  CHECK(std::abs(momentum(gs.as_complex())[0]) < 1e-12);

  const double k0 = g.wavenumber(11);
  const ComplexField boosted = sample(g, [&](Point p) {
    return std::exp(cplx{0.0, k0 * p[0]}) * gs.profile->value(std::abs(p[0]));
  });
  CHECK(std::abs(momentum(boosted)[0] - k0 * gs.mass) < 1e-8);

  const ComplexField f = test_field(g, 0.7);
  ComplexField fb = f;
  for (std::size_t i = 0; i < f.size(); ++i) fb[i] *= std::exp(cplx{0.0, k0 * g.position(i)[0]});
  CHECK(std::abs(momentum(fb)[0] - momentum(f)[0] - k0 * l2_norm_sq(f)) < 1e-10);

  const ComplexField shifted = sample(g, [&](Point p) {
    const double x = (p[0] - 1.3) / 0.7;
    return std::exp(-x * x) * (1.0 + 0.5 * x) * std::exp(cplx{0.0, 0.3 * x}) / std::sqrt(0.7);
  });
  CHECK(std::abs(momentum(shifted)[0] - momentum(f)[0]) < 1e-10);
}

TEST_CASE("energy drift report") {
  std::vector<TrajectoryRow> rows(3);
  rows[0].energy = 1.0;
  rows[0].momentum = {0.0};
  rows[1].energy = 1.5;
  rows[1].momentum = {0.2};
  rows[1].drift_budget = 1.0;
  rows[2].energy = 0.0;
  rows[2].momentum = {-0.3};
  rows[2].drift_budget = 3.0;
  const DriftReport d = check_energy_drift(rows);
  CHECK(d.sup_energy_ratio == doctest::Approx(0.25));
  CHECK(d.sup_momentum_ratio == doctest::Approx(0.1));
  CHECK(d.max_relative_energy_change == doctest::Approx(1.0));
  CHECK(d.bounded);
  CHECK(drift_stability(0.5, 0.25) == doctest::Approx(2.0));
  CHECK(drift_stability(0.25, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("noise-off energy conservation") {
  const GroundState gs = reference_ground_state(1);
  const TrajectoryRecord rec = run_path(quiet_soliton(0.9), 1, gs, {StepFlags{}, false});
  REQUIRE(rec.rows.size() >= 2);
  const DriftReport d = check_energy_drift(rec.rows);
  CHECK(d.max_relative_energy_change < 1e-6);
}

TEST_CASE("linear noisy drift is stable under step halving") {
  SimConfig cfg = quiet_soliton(0.9);
  // Off-centre bump: with a centred one P stays zero by symmetry.
  cfg.noise.bumps = {{1.0, {0.7, 0.0}, 1.0}};
  cfg.noise.amplitude = 0.5;
  cfg.noise.path_bound = 1e6;
  const GroundState gs = reference_ground_state(1);
  const PathOptions linear{{true, false, true}, false};
  const TrajectoryRecord a = run_path(cfg, 3, gs, linear);
  cfg.time.dt0 *= 0.5;
  cfg.time.sample_every *= 2;
  const TrajectoryRecord b = run_path(cfg, 3, gs, linear);
  const DriftReport da = check_energy_drift(a.rows), db = check_energy_drift(b.rows);
  CHECK(std::isfinite(da.sup_energy_ratio));
  CHECK(da.sup_energy_ratio > 0.0);
  CHECK(da.sup_momentum_ratio > 1e-3);
  CHECK(drift_stability(da.sup_energy_ratio, db.sup_energy_ratio) <= 2.0);
  CHECK(drift_stability(da.sup_momentum_ratio, db.sup_momentum_ratio) <= 2.0);
}

TEST_CASE("bootstrap monitor on synthetic series") {
  std::vector<TrajectoryRow> rows;
  for (int i = 0; i < 100; ++i) {
    const double t = 0.99 * i / 99.0;
    rows.push_back(row(t, std::sqrt(1.0 - t), 0.1));
  }
  const BootstrapReport rep = bootstrap_monitor(rows, 0.2);
  CHECK(rep.all_b_positive());
  CHECK(rep.all_below_alpha());
  CHECK(rep.all_monotone_3_2());
  CHECK(rep.all_monotone_5_4());
  CHECK(rep.first_b_crossing == -1);
  CHECK_FALSE(rep.flags[0].lambda_bound);

  rows[60].b = -0.01;
  const BootstrapReport crossed = bootstrap_monitor(rows, 0.2);
  CHECK(crossed.first_b_crossing == 60);
  CHECK_FALSE(crossed.flags[60].b_positive);
  CHECK_FALSE(crossed.all_b_positive());

  // A rebound above 3/2 of an earlier value breaks monotonicity at that earlier row.
  rows[60].b = 0.1;
  rows[80].lambda = 2.0 * rows[40].lambda;
  CHECK_FALSE(bootstrap_monitor(rows, 0.2).flags[40].monotone_3_2);
}

TEST_CASE("dyadic bins") {
  // lambda = sqrt(T - t): t_k = T - 4^{-k}, so (t_{k+1} - t_k) / lambda_k^2 = 3/4.
  std::vector<TrajectoryRow> rows;
  for (int i = 0; i < 4000; ++i) {
    const double tau = std::pow(2.0, -1.0 - 12.0 * i / 3999.0);
    rows.push_back(row(1.0 - tau, std::sqrt(tau), 0.1));
  }
  const BootstrapReport rep = bootstrap_monitor(rows, 0.2);
  REQUIRE(rep.bins.size() >= 4);
  for (const auto& bin : rep.bins) {
    CHECK(bin.length / (bin.lambda_k * bin.lambda_k) == doctest::Approx(0.75).epsilon(0.01));
  }
}

TEST_CASE("lambda-energy monitor") {
  std::vector<TrajectoryRow> rows;
  for (int k = 0; k < 8; ++k) {
    TrajectoryRow r = row(0.1 * k, std::ldexp(1.0, -k), 0.1);
    r.energy = -3.0;
    r.momentum = {0.5};
    rows.push_back(r);
  }
  CHECK(rows[1].lambda2_energy() == doctest::Approx(0.25 * rows[0].lambda2_energy()));
  const LambdaEReport rep = lambda_e_monitor(rows);
  CHECK(rep.energy_slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(rep.momentum_slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rep.energy_decreasing);
  CHECK(rep.momentum_decreasing);
  CHECK(fit_slope({0.0, 1.0, 2.0}, {1.0, 3.0, 5.0}) == doctest::Approx(2.0));
}

TEST_CASE("virial proxy") {
  std::vector<TrajectoryRow> flat;
  for (int i = 0; i < 5; ++i) {
    TrajectoryRow r = row(0.1 * i, 0.5, 0.2);
    r.s = i;
    flat.push_back(r);
  }
  for (const auto& p : virial_proxy(flat)) CHECK(p.q == 0.0);

  const double b0 = 0.25;
  const double g0 = gamma_b(b0);
  std::vector<TrajectoryRow> loglog;
  for (int i = 0; i < 20; ++i) {
    TrajectoryRow r = row(0.01 * i, 0.5, b0 - g0 * i);
    r.s = i;
    loglog.push_back(r);
  }
  // b_s = -Gamma_{b0} exactly; the ratio uses Gamma at the current b.
  const auto vp = virial_proxy(loglog);
  for (std::size_t i = 0; i < vp.size(); ++i) {
    CHECK(vp[i].ratio == doctest::Approx(-g0 / gamma_b(loglog[i].b)).epsilon(1e-6));
    CHECK(vp[i].ratio == doctest::Approx(-1.0).epsilon(0.01));
  }

  flat.resize(2);
  CHECK_THROWS_AS(virial_proxy(flat), Error);
}

TEST_CASE("rate fit: log-log data") {
  const auto pts = rate_series(model_b_lambda, 1.0, 1.0, 0.01, 5);
  const RateFit fit = fit_blowup_rate(pts, 0.05, 2e-4);
  REQUIRE(fit.loglog.ok);
  REQUIRE(fit.power_law.ok);
  CHECK(std::abs(fit.loglog.T - 1.0) < 1e-3);
  CHECK(fit.loglog.residual < fit.power_law.residual);
  CHECK(fit.loglog_not_worse());
  CHECK(fit.t_b < fit.loglog.T);
  CHECK(fit.samples >= 20);
}

TEST_CASE("rate fit: power laws") {
  std::vector<RatePoint> pts;
  for (int i = 0; i <= 300; ++i) {
    const double t = 2.0 - std::pow(10.0, -1.0 - 6.0 * i / 300.0);
    pts.push_back({t, model_c_lambda(t, 2.0, 0.8, 0.5)});
  }
  const RateFit fit = fit_blowup_rate(pts, 0.05, 2e-4);
  REQUIRE(fit.free.ok);
  CHECK(std::abs(fit.free.p - 0.5) < 0.01);
  CHECK(std::abs(fit.power_law.T - 2.0) < 1e-8);

  std::vector<RatePoint> linear;
  for (int i = 0; i <= 300; ++i) {
    const double t = -std::pow(10.0, -0.5 - 3.0 * i / 300.0);
    linear.push_back({t, model_c_lambda(t, 0.0, 1.0, 1.0)});
  }
  const RateFit lin = fit_blowup_rate(linear, 0.3, 1e-3);
  REQUIRE(lin.free.ok);
  CHECK(std::abs(lin.free.p - 1.0) < 0.01);
}

TEST_CASE("rate fit is idempotent on model output") {
  const auto noisy = rate_series(model_a_lambda, 1.0, 1.3, 0.02, 9);
  const RateFit first = fit_blowup_rate(noisy, 0.05, 2e-4);
  REQUIRE(first.power_law.ok);
  std::vector<RatePoint> regen;
  for (const auto& p : noisy) regen.push_back({p.t, model_a_lambda(p.t, first.power_law.T, first.power_law.C)});
  const RateFit second = fit_blowup_rate(regen, 0.05, 2e-4);
  CHECK(std::abs(second.power_law.T - first.power_law.T) < 1e-10);
  CHECK(std::abs(second.power_law.C - first.power_law.C) < 1e-10 * first.power_law.C);
}

TEST_CASE("rate fit errors") {
  std::vector<RatePoint> few;
  for (int i = 0; i < 10; ++i) few.push_back({0.1 * i, 0.01});
  try {
    fit_blowup_rate(few, 0.05, 2e-4);
    FAIL("short window accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::insufficient_window);
  }
}

}  // TEST_SUITE
