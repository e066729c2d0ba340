#include <doctest.h>

#include <cmath>
#include <numbers>

#include "snls/config.hpp"
#include "snls/diagnostics.hpp"
#include "snls/error.hpp"
#include "snls/ground_state.hpp"
#include "snls/modulation.hpp"
#include "snls/path.hpp"

using namespace snls;

namespace {

constexpr double kY2Q2 = 1.67826395511929222804;      // int y^2 Q^2
constexpr double kLambdaQ2 = 0.83913197755964611402;  // int (Lambda Q)^2

const GroundState& ref() {
  static const GroundState gs = reference_ground_state(1);
  return gs;
}

double angle_diff(double a, double b) { return std::remainder(a - b, 2.0 * std::numbers::pi); }

}  // namespace

TEST_SUITE("modulation") {

TEST_CASE("initial guess on constructed inputs") {
  const GroundState& gs = ref();
  const Grid g = make_grid(1, 20.0, 4096);
  const double lam = 0.3;
  const ComplexField u = ansatz_field({lam, 0.0, {0.0, 0.0}, 0.0}, *gs.profile, g);
  const ModulationParams p = initial_guess(u, gs);
  CHECK(std::abs(p.lambda - lam) < 1e-6);
  CHECK(std::abs(p.b) < 1e-6);
  CHECK(std::abs(p.gamma) < 1e-6);
  CHECK(std::abs(p.x_c[0]) < 1e-6);

  const double a = 2.37;
  const ModulationParams pt = initial_guess(ansatz_field({lam, 0.0, {a, 0.0}, 0.0}, *gs.profile, g), gs);
  CHECK(std::abs(pt.x_c[0] - a) < g.dx());

  const ModulationParams pb = initial_guess(ansatz_field({lam, 0.1, {0.4, 0.0}, 0.8}, *gs.profile, g), gs);
  CHECK(std::abs(pb.b - 0.1) < 0.01);

  try {
    initial_guess(ComplexField(g), gs);
    FAIL("flat field accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::flat_field);
  }
}

TEST_CASE("orthogonality residuals") {
  const GroundState& gs = ref();
  const auto zero = orthogonality_residuals(ComplexField(gs.grid), 0.1, *gs.profile);
  REQUIRE(zero.size() == 4);
  for (double r : zero) CHECK(r == 0.0);

  ComplexField ilq = apply_lambda(gs.as_complex());
  for (auto& v : ilq.values) v *= cplx{0.0, 1.0};
  const auto r = orthogonality_residuals(ilq, 0.0, *gs.profile);
  CHECK(r[2] == doctest::Approx(kLambdaQ2).epsilon(1e-9));

  const ComplexField odd = sample(gs.grid, [](Point y) { return cplx{y[0] * std::exp(-y[0] * y[0])}; });
  const auto ro = orthogonality_residuals(odd, 0.0, *gs.profile);
  CHECK(std::abs(ro[0]) < 1e-14);
  CHECK(std::abs(ro[2]) < 1e-14);
  CHECK(std::abs(ro[3]) < 1e-14);
  CHECK(std::abs(ro[1]) > 0.1);
}

TEST_CASE("decompose recovers an exact ansatz member") {
  const GroundState& gs = ref();
  const Grid g = make_grid(1, 20.0, 4096);
  const ModulationParams p{0.2, 0.05, {0.3, 0.0}, 1.0};
  const ComplexField u = ansatz_field(p, *gs.profile, g);
  const ModulationState st = decompose(u, initial_guess(u, gs), gs);
  CHECK(st.converged);
  CHECK(st.valid);
  CHECK(st.status == ModulationStatus::ok);
  CHECK(std::abs(st.lambda - p.lambda) < 1e-8);
  CHECK(std::abs(st.b - p.b) < 1e-8);
  CHECK(std::abs(st.x_c[0] - p.x_c[0]) < 1e-8);
  CHECK(std::abs(angle_diff(st.gamma, p.gamma)) < 1e-8);
  CHECK(st.eps_l2 < 1e-8);
}

TEST_CASE("decompose with a perturbation") {
  const GroundState& gs = ref();
  const Grid g = make_grid(1, 20.0, 4096);
  const ModulationParams p{0.2, 0.05, {0.3, 0.0}, 1.0};
  ComplexField u = ansatz_field(p, *gs.profile, g);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = g.position(i)[0];
    u[i] += 0.01 * std::exp(-std::pow((x - 0.45) / 0.15, 2)) * cplx{1.0, 0.5};
  }
  const ModulationState st = decompose(u, initial_guess(u, gs), gs);
  REQUIRE(st.converged);
  for (double r : st.residuals) CHECK(std::abs(r) < 1e-10);
  ComplexField diff = reconstruct(st, gs);
  for (std::size_t i = 0; i < u.size(); ++i) diff[i] -= u[i];
  CHECK(l2_norm(diff) < 1e-10);
  CHECK(st.eps_l2 > 1e-3);

  // The remainder satisfies the conditions when re-evaluated directly.
  const auto direct = residuals_at(u, st.params(), *gs.profile);
  for (double r : direct) CHECK(std::abs(r) < 1e-10);
}

TEST_CASE("smallness threshold") {
  const GroundState& gs = ref();
  const Grid g = make_grid(1, 20.0, 4096);
  const ComplexField u = ansatz_field({0.3, 0.3, {0.0, 0.0}, 0.0}, *gs.profile, g);
  DecomposeOptions opts;
  opts.alpha = 0.2;
  const ModulationState st = decompose(u, initial_guess(u, gs), gs, opts);
  CHECK(st.converged);
  CHECK_FALSE(st.valid);
  CHECK(st.status == ModulationStatus::eps_too_large);
  opts.alpha = 0.35;
  CHECK(decompose(u, initial_guess(u, gs), gs, opts).valid);
}

TEST_CASE("gauge and translation covariance") {
  const GroundState& gs = ref();
  const Grid g = make_grid(1, 20.0, 4096);
  const ModulationParams p{0.25, 0.1, {-0.6, 0.0}, 0.4};
  ComplexField u = ansatz_field(p, *gs.profile, g);
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] += 0.005 * std::exp(-std::pow(g.position(i)[0] + 0.5, 2) / 0.05);
  }
  const ModulationState a = decompose(u, initial_guess(u, gs), gs);
  ComplexField rotated = u;
  for (auto& v : rotated.values) v *= std::polar(1.0, 0.9);
  const ModulationState b = decompose(rotated, a.params(), gs);
  CHECK(std::abs(angle_diff(b.gamma, a.gamma + 0.9)) < 1e-8);
  CHECK(std::abs(b.lambda - a.lambda) < 1e-8);
  CHECK(std::abs(b.b - a.b) < 1e-8);
}

TEST_CASE("Jacobian conditioning at eps = 0") {
  const GroundState& gs = ref();
  const Grid g = make_grid(1, 20.0, 4096);
  for (double b : {0.0, 0.1, 0.2, 0.3}) {
    const ModulationParams p{0.3, b, {0.0, 0.0}, 0.0};
    const double cond = jacobian_condition(ansatz_field(p, *gs.profile, g), p, *gs.profile);
    CHECK(cond < 1e4);
    CHECK(cond >= 1.0);
  }
}

TEST_CASE("initial data") {
  const GroundState& gs = ref();
  const Grid g = make_grid(1, 20.0, 8192);
  InitialConfig spec;
  spec.lambda0 = 0.1;
  spec.b0 = 0.1;
  const InitialData d = build_initial_data(spec, gs, g);
  CHECK(std::abs(l2_norm_sq(d.u0) - gs.mass) < 1e-8);
  CHECK(std::abs(momentum(d.u0)[0]) < 1e-10);
  // E(u0) = E(Q~_b0) / lambda0^2, and E(Q~_b) = b^2/8 int y^2 Q^2.
  const double e_qb = energy(qb_profile(spec.b0, gs));
  CHECK(energy(d.u0) == doctest::Approx(e_qb / (spec.lambda0 * spec.lambda0)).epsilon(1e-8));
  CHECK(e_qb == doctest::Approx(spec.b0 * spec.b0 / 8.0 * kY2Q2).epsilon(1e-8));

  CHECK(d.report.b_positive);
  CHECK(d.report.smallness);
  CHECK(d.report.energy_bound);
  CHECK(d.report.momentum_bound);
  CHECK_FALSE(d.report.lambda_bound);
  CHECK_FALSE(d.report.all());

  spec.b0 = 0.0;
  try {
    build_initial_data(spec, gs, g);
    FAIL("b0 = 0 accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_spec);
  }
}

TEST_CASE("initial data with a projected remainder") {
  const GroundState& gs = ref();
  const Grid g = make_grid(1, 20.0, 8192);
  InitialConfig spec;
  spec.lambda0 = 0.1;
  spec.b0 = 0.1;
  spec.eps = EpsRecipe::gaussian;
  spec.eps_amplitude = 0.01;
  const InitialData d = build_initial_data(spec, gs, g);
  CHECK(d.report.eps_l2 > 0.0);
  const ModulationState st = decompose(d.u0, {spec.lambda0, spec.b0, spec.x0, spec.gamma0}, gs);
  CHECK(st.converged);
  CHECK(std::abs(st.lambda - spec.lambda0) < 1e-8);
  CHECK(std::abs(st.b - spec.b0) < 1e-8);
}

TEST_CASE("series") {
  std::vector<ModulationSample> flat;
  for (int i = 0; i < 5; ++i) flat.push_back({0.1 * i, 1.0 * i, 0.3, 0.2, true});
  for (const auto& p : series(flat)) {
    CHECK(p.b_s == 0.0);
    CHECK(p.minus_lambda_s_over_lambda == 0.0);
  }

  const double b0 = 0.17;
  std::vector<ModulationSample> ex;
  for (int i = 0; i < 40; ++i) {
    const double s = 0.25 * i;
    ex.push_back({0.01 * i, s, std::exp(-b0 * s), b0, true});
  }
  ex[7].valid = false;
  for (const auto& p : series(ex)) CHECK(std::abs(p.minus_lambda_s_over_lambda - b0) < 1e-6);

  std::vector<ModulationSample> few{{0, 0, 1, 0, true}, {1, 1, 1, 0, false}, {2, 2, 1, 0, true}};
  try {
    series(few);
    FAIL("two valid samples accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::insufficient_samples);
  }
}

}  // TEST_SUITE
