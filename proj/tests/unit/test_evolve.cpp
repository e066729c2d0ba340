#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "snls/config.hpp"
#include "snls/diagnostics.hpp"
#include "snls/error.hpp"
#include "snls/evolve.hpp"
#include "snls/ground_state.hpp"
#include "snls/noise.hpp"
#include "snls/path.hpp"

using namespace snls;

namespace {

double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ComplexField random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ComplexField f(g);
  for (auto& v : f.values) v = {nd(rng), nd(rng)};
  return f;
}

PhiFamily three_bumps() {
  return {1, {{1.0, {0.0, 0.0}, 1.0}, {0.6, {2.0, 0.0}, 0.8}, {-0.4, {-3.0, 0.0}, 1.5}}};
}

SimConfig quiet_config() {
  SimConfig cfg;
  cfg.grid = {1, 20.0, 512};
  cfg.noise.bumps.clear();
  cfg.noise.amplitude = 0.0;
  cfg.time.horizon = 5.0;
  cfg.time.dt0 = 1e-3;
  return cfg;
}

}  // namespace

TEST_SUITE("evolve") {

TEST_CASE("kinetic step") {
  const Grid g = make_grid(1, 20.0, 256);
  const ComplexField f = random_field(g, 1);
  CHECK(max_abs_diff(step_kinetic(f, 0.0), f) < 1e-14);
  CHECK(l2_norm_sq(step_kinetic(f, 0.37)) == doctest::Approx(l2_norm_sq(f)).epsilon(1e-13));

  const double k0 = g.wavenumber(9);
  const double dt = 0.013;
  const ComplexField w = sample(g, [&](Point x) { return std::exp(cplx{0.0, k0 * x[0]}); });
  ComplexField expect = w;
  for (auto& v : expect.values) v *= std::exp(cplx{0.0, -k0 * k0 * dt});
  CHECK(max_abs_diff(step_kinetic(w, dt), expect) < 1e-12);
}

TEST_CASE("free Gaussian spreading") {
  // i u_t + u_xx = 0 with u(0) = e^{-x^2}: u = (1 + 4it)^{-1/2} exp(-x^2 / (1 + 4it)).
  const Grid g = make_grid(1, 20.0, 512);
  ComplexField u = sample(g, [](Point x) { return cplx{std::exp(-x[0] * x[0])}; });
  for (int i = 0; i < 100; ++i) u = step_kinetic(std::move(u), 1e-3);
  const cplx z{1.0, 0.4};
  const ComplexField exact = sample(g, [&](Point x) { return std::exp(-x[0] * x[0] / z) / std::sqrt(z); });
  CHECK(max_abs_diff(u, exact) < 1e-8);
}

TEST_CASE("nonlinear step") {
  const Grid g = make_grid(1, 20.0, 128);
  CHECK(l2_norm(step_nonlinear(ComplexField(g), 0.5)) == 0.0);

  const ComplexField f = random_field(g, 2);
  const ComplexField h = step_nonlinear(f, 0.21);
  double dmod = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) dmod = std::max(dmod, std::abs(std::abs(h[i]) - std::abs(f[i])));
  CHECK(dmod < 1e-13);

  const cplx c{0.8, -0.3};
  const double dt = 0.05;
  const ComplexField cf = sample(g, [&](Point) { return c; });
  const cplx exact = c * std::exp(cplx{0.0, std::pow(std::norm(c), 2) * dt});
  for (const auto& v : step_nonlinear(cf, dt).values) CHECK(std::abs(v - exact) < 1e-15);
}

TEST_CASE("noise step") {
  const Grid g = make_grid(1, 20.0, 128);
  const ComplexField f = random_field(g, 3);
  CHECK(max_abs_diff(step_noise(f, RealField(g)), f) == 0.0);
  RealField dw(g);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (auto& v : dw.values) v = 3.0 * nd(rng);
  CHECK(l2_norm_sq(step_noise(f, dw)) == doctest::Approx(l2_norm_sq(f)).epsilon(1e-14));
}

TEST_CASE("noise-only evolution is X0 e^{iW}") {
  const Grid g = make_grid(1, 20.0, 256);
  NoiseRealization noise(three_bumps(), 1.0 / 64.0, 21);
  const ComplexField x0 = sample(g, [](Point x) { return cplx{std::exp(-0.2 * x[0] * x[0]), 0.1}; });
  EvolveState st;
  st.X = x0;
  st.dt = kTicksPerBase >> 3;
  Stepper stepper(noise, {false, false, true});
  for (int i = 0; i < 400; ++i) stepper.step(st);
  const RealField w = eval_W(noise, st.tick, g);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    err = std::max(err, std::abs(st.X[i] - x0[i] * std::exp(cplx{0.0, w[i]})));
  }
  CHECK(err < 1e-12);
}

TEST_CASE("soliton is stationary up to phase") {
  const GroundState gs = ground_state(make_grid(1, 20.0, 512));
  ComplexField x = gs.as_complex();
  for (int i = 0; i < 2000; ++i) x = strang_step(std::move(x), 5e-4);
  ComplexField exact = gs.as_complex();
  for (auto& v : exact.values) v *= std::exp(cplx{0.0, 1.0});
  ComplexField diff = x;
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= exact[i];
  CHECK(l2_norm(diff) < 1e-5);
}

TEST_CASE("deterministic scheme is second order") {
  const GroundState gs = ground_state(make_grid(1, 20.0, 256));
  auto run = [&](double dt) {
    ComplexField x = sample(gs.grid, [&](Point p) {
      return 0.8 * gs.profile->value(std::abs(p[0])) * std::exp(cplx{0.0, 0.3 * p[0]});
    });
    const int steps = static_cast<int>(std::lround(0.5 / dt));
    for (int i = 0; i < steps; ++i) x = strang_step(std::move(x), dt);
    return x;
  };
  const ComplexField a = run(0.01), b = run(0.005), c = run(0.0025);
  ComplexField dab = a, dbc = b;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dab[i] -= b[i];
    dbc[i] -= c[i];
  }
  const double ratio = l2_norm(dab) / l2_norm(dbc);
  CHECK(ratio > 4.0 * 0.8);
  CHECK(ratio < 4.0 * 1.2);
}

TEST_CASE("time reversal") {
  const GroundState gs = ground_state(make_grid(1, 20.0, 256));
  const ComplexField x0 = sample(gs.grid, [&](Point p) {
    return 1.1 * gs.profile->value(std::abs(p[0] - 0.5)) * std::exp(cplx{0.0, -0.7 * p[0]});
  });
  const ComplexField back = strang_step(strang_step(x0, 2e-3), -2e-3);
  CHECK(max_abs_diff(back, x0) < 1e-12);
}

TEST_CASE("stepper conserves mass and merged steps agree") {
  const Grid g = make_grid(1, 20.0, 256);
  NoiseRealization noise(three_bumps(), 1.0 / 64.0, 8);
  const GroundState gs = ground_state(g);
  EvolveState a;
  a.X = gs.as_complex();
  for (auto& v : a.X.values) v *= 0.9;
  a.dt = kTicksPerBase >> 4;
  EvolveState b = a;
  const double m0 = l2_norm_sq(a.X);
  Stepper sa(noise), sb(noise);
  for (int i = 0; i < 10000; ++i) sa.step(a);
  for (int i = 0; i < 100; ++i) sb.advance(b, 100);
  CHECK(a.tick == b.tick);
  CHECK(std::abs(l2_norm_sq(a.X) - m0) < 1e-10 * m0);
  CHECK(max_abs_diff(a.X, b.X) < 1e-10);
  CHECK_THROWS_AS([&] { EvolveState z = a; z.dt = 0; sa.step(z); }(), Error);
}

TEST_CASE("to_u") {
  const Grid g = make_grid(1, 20.0, 256);
  NoiseRealization noise(three_bumps(), 1.0 / 64.0, 12);
  const ComplexField x = sample(g, [](Point p) { return cplx{std::exp(-0.5 * p[0] * p[0]), 0.2 * std::exp(-p[0] * p[0])}; });
  CHECK(max_abs_diff(to_u(x, noise, Tick{0}), x) == 0.0);

  for (int j : {1, 7, 40}) {
    const Tick t = j * kTicksPerBase;
    const ComplexField u = to_u(x, noise, t);
    double dmod = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dmod = std::max(dmod, std::abs(std::abs(u[i]) - std::abs(x[i])));
    CHECK(dmod < 1e-15);
    CHECK(l2_norm_sq(u) == doctest::Approx(l2_norm_sq(x)).epsilon(1e-14));
    // |grad u| <= |grad X| + |grad W| |X| pointwise, so the H1 norms compare with 1 + sup|grad W|.
    const auto co = eval_coeffs(noise, t, g);
    double grad_w = 0.0;
    for (double v : co.beta[0].values) grad_w = std::max(grad_w, 0.5 * std::abs(v));
    CHECK(h1_norm(u) <= (1.0 + grad_w) * h1_norm(x) * (1.0 + 1e-12));
  }
}

TEST_CASE("refinement") {
  const GroundState gs = ground_state(make_grid(1, 20.0, 256));
  EvolveState st;
  st.X = gs.as_complex();
  for (std::size_t i = 0; i < st.X.size(); ++i) st.X[i] *= std::exp(cplx{0.0, 0.1 * gs.grid.position(i)[0]});
  const EvolveState fine = refine(st);
  CHECK(fine.grid().n == 512);
  CHECK(fine.refinement_level == 1);
  const double m = l2_norm_sq(st.X);
  CHECK(std::abs(l2_norm_sq(fine.X) - m) < 1e-8 * m);
  const double e = energy(st.X);
  CHECK(std::abs(energy(fine.X) - e) < 1e-6 * std::abs(e));
}

TEST_CASE("checkpoint round trip resumes bitwise") {
  const Grid g = make_grid(1, 20.0, 128);
  NoiseRealization noise(three_bumps(), 1.0 / 64.0, 30);
  EvolveState st;
  st.X = sample(g, [](Point p) { return cplx{std::exp(-p[0] * p[0])}; });
  st.dt = kTicksPerBase >> 2;
  st.seed = 30;
  st.t_origin = -0.5;
  st.refinement_level = 2;
  EvolveState straight = st;
  Stepper s1(noise);
  for (int i = 0; i < 100; ++i) s1.step(straight);

  Stepper s2(noise);
  for (int i = 0; i < 50; ++i) s2.step(st);
  const auto path = std::filesystem::temp_directory_path() / "snls_ckpt_test.bin";
  save_checkpoint(st, path);
  EvolveState resumed = load_checkpoint(path);
  CHECK(resumed == st);
  Stepper s3(noise);
  for (int i = 0; i < 50; ++i) s3.step(resumed);
  CHECK(resumed == straight);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_checkpoint(path), Error);
}

TEST_CASE("run_path: zero datum reaches the horizon") {
  SimConfig cfg = quiet_config();
  cfg.initial.preset = InitialPreset::zero;
  cfg.time.horizon = 0.5;
  const GroundState gs = reference_ground_state(1);
  const TrajectoryRecord rec = run_path(cfg, 1, gs, {StepFlags{}, false});
  CHECK(rec.stop == StopReason::horizon_reached);
  CHECK(rec.max_mass_drift == 0.0);
}

TEST_CASE("run_path: subcritical mass does not blow up") {
  SimConfig cfg = quiet_config();
  cfg.initial.preset = InitialPreset::soliton_oracle;
  cfg.initial.mass_scale = 0.9;
  const GroundState gs = reference_ground_state(1);
  const TrajectoryRecord rec = run_path(cfg, 1, gs, {StepFlags{}, false});
  CHECK(rec.stop == StopReason::horizon_reached);
  REQUIRE(!rec.rows.empty());
  CHECK(rec.rows.back().t == doctest::Approx(5.0));
  double h1 = 0.0;
  for (const auto& r : rec.rows) h1 = std::max(h1, r.h1);
  CHECK(h1 < 10.0);
  CHECK(rec.max_mass_drift < 1e-10);
}

}  // TEST_SUITE
