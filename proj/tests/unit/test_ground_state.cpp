#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "snls/diagnostics.hpp"
#include "snls/error.hpp"
#include "snls/ground_state.hpp"

using namespace snls;

namespace {

// Offline quadrature values for the 1d ground state.
constexpr double kQMass = 2.72069904635132677589;
constexpr double kY2Q2 = 1.67826395511929222804;   // int y^2 Q^2
constexpr double kLambdaQ2 = 0.83913197755964611402;  // int (Q/2 + y Q')^2

double q1d(double x) { return std::pow(3.0, 0.25) / std::sqrt(std::cosh(2.0 * x)); }
double dq1d(double x) { return -q1d(x) * std::tanh(2.0 * x); }

const GroundState& gs2d() {
  static const GroundState gs = ground_state(make_grid(2, 16.0, 256));
  return gs;
}

}  // namespace

TEST_SUITE("ground_state") {

TEST_CASE("1d closed form") {
  const GroundState gs = ground_state(make_grid(1, 20.0, 1024));
  CHECK(gs.central_value == doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-15));
  CHECK(std::pow(3.0, 0.25) == doctest::Approx(1.31607).epsilon(1e-5));
  CHECK(std::abs(gs.mass - kQMass) < 1e-8);
  CHECK(std::abs(energy(gs.as_complex())) < 1e-9);
  CHECK(elliptic_residual(gs, 15.0) < 1e-10);
  // On a wider box the periodic wrap of the tail is negligible everywhere.
  CHECK(elliptic_residual(ground_state(make_grid(1, 40.0, 4096))) < 1e-10);
  for (double v : gs.q.values) CHECK(v > 0.0);

  const GroundState coarse = ground_state_1d(make_grid(1, 20.0, 256));
  CHECK(profile_residual(coarse) < 1e-10);
  CHECK_THROWS_AS(ground_state_1d(make_grid(2, 10.0, 64)), Error);
}

TEST_CASE("1d profile derivatives") {
  const RadialProfile p = RadialProfile::closed_form_1d();
  for (double r : {0.0, 0.3, 1.0, 2.5, 7.0}) {
    CHECK(p.value(r) == doctest::Approx(q1d(r)).epsilon(1e-14));
    CHECK(p.d1(r) == doctest::Approx(dq1d(r)).epsilon(1e-13));
    // Q'' = Q - Q^5 along the profile.
    CHECK(p.d2(r) == doctest::Approx(q1d(r) - std::pow(q1d(r), 5)).epsilon(1e-12));
  }
}

TEST_CASE("even symmetry in 1d") {
  const GroundState gs = ground_state(make_grid(1, 20.0, 512));
  double asym = 0.0;
  for (int i = 1; i < gs.grid.n; ++i) asym = std::max(asym, std::abs(gs.q[i] - gs.q[gs.grid.n - i]));
  CHECK(asym < 1e-12);
}

TEST_CASE("2d Townes profile") {
  const ShootingResult sh = shoot_townes();
  CHECK(sh.bracket_width < 1e-12);
  CHECK(std::abs(sh.mass - 11.70) < 0.01);
  CHECK(sh.central_value > 2.2);
  CHECK(sh.central_value < 2.25);

  const GroundState& gs = gs2d();
  CHECK(std::abs(gs.mass - 11.70) < 0.01);
  CHECK(std::abs(energy(gs.as_complex())) < 1e-6);
  CHECK(elliptic_residual(gs, 8.0) < 1e-6);

  // Radial: invariant under x <-> y and x -> -x.
  const int n = gs.grid.n;
  double asym = 0.0;
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      const double v = gs.q[static_cast<std::size_t>(i) * n + j];
      asym = std::max(asym, std::abs(v - gs.q[static_cast<std::size_t>(j) * n + i]));
      asym = std::max(asym, std::abs(v - gs.q[static_cast<std::size_t>(n - i) * n + j]));
    }
  }
  CHECK(asym < 1e-12);
}

TEST_CASE("2d renormalized iteration agrees with shooting") {
  const Grid g = make_grid(2, 16.0, 128);
  const RealField q = townes_petviashvili(g);
  double mass = 0.0;
  for (double v : q.values) mass += v * v;
  mass *= g.cell_volume();
  CHECK(std::abs(mass - shoot_townes().mass) < 1e-4);
}

TEST_CASE("Q~_b family") {
  const GroundState gs = ground_state(make_grid(1, 20.0, 1024));
  const ComplexField q0 = qb_profile(0.0, gs);
  for (std::size_t i = 0; i < q0.size(); ++i) CHECK(q0[i] == cplx{gs.q[i]});

  for (double b : {-0.3, 0.1, 0.45}) {
    CHECK(l2_norm_sq(qb_profile(b, gs)) == doctest::Approx(gs.mass).epsilon(1e-14));
  }

  // |grad Q~_b|^2 = Q'^2 + b^2 y^2 Q^2 / 4, so E(Q~_b) - E(Q) = b^2/8 int y^2 Q^2.
  const double b = 0.1;
  const double expect = b * b / 8.0 * kY2Q2;
  CHECK(std::abs(energy(qb_profile(b, gs)) - expect) < 0.01 * expect);

  CHECK_THROWS_AS(qb_profile(0.5, gs), Error);
  try {
    qb_profile(-0.6, gs);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::b_out_of_range);
  }
}

TEST_CASE("scaling generator") {
  const GroundState gs = ground_state(make_grid(1, 40.0, 4096));
  const ComplexField q = gs.as_complex();
  const ComplexField lq = apply_lambda(q);
  CHECK(std::abs(real_inner(q, lq)) < 1e-10);
  CHECK(l2_norm_sq(lq) == doctest::Approx(kLambdaQ2).epsilon(1e-9));

  double err = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double x = gs.grid.position(i)[0];
    err = std::max(err, std::abs(lq[i] - cplx{0.5 * q1d(x) + x * dq1d(x)}));
  }
  CHECK(err < 1e-10);

  // A plateau: Lambda acts as multiplication by d/2 where the field is flat.
  const ComplexField flat =
      sample(gs.grid, [](Point x) { return cplx{std::exp(-std::pow(x[0] / 20.0, 16))}; });
  const ComplexField lf = apply_lambda(flat);
  double plateau = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (std::abs(gs.grid.position(i)[0]) < 2.0) plateau = std::max(plateau, std::abs(lf[i] - 0.5 * flat[i]));
  }
  CHECK(plateau < 1e-8);

  const ComplexField l2 = apply_lambda(q, 2);
  const ComplexField ll = apply_lambda(lq);
  double diff = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) diff = std::max(diff, std::abs(l2[i] - ll[i]));
  CHECK(diff < 1e-13);
}

TEST_CASE("2d generator pairing") {
  const GroundState& gs = gs2d();
  const ComplexField q = gs.as_complex();
  CHECK(std::abs(real_inner(q, apply_lambda(q))) < 1e-8);
}

TEST_CASE("Gamma_b") {
  CHECK(gamma_b(std::numbers::pi) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(gamma_b(0.3) == doctest::Approx(2.8e-5).epsilon(0.02));
  CHECK(gamma_b(0.2) < gamma_b(0.3));
  CHECK(log_gamma_b(0.01) == doctest::Approx(-100.0 * std::numbers::pi));
  for (double bad : {0.0, -0.1}) {
    try {
      gamma_b(bad);
      FAIL("nonpositive b accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::nonpositive_b);
    }
  }
}

TEST_CASE("profile CSV") {
  const auto path = std::filesystem::temp_directory_path() / "snls_profile_test.csv";
  write_profile_csv(RadialProfile::closed_form_1d(), 5.0, 10, path);
  std::ifstream in(path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "r,Q");
  CHECK(std::stod(first.substr(first.find(',') + 1)) == doctest::Approx(std::pow(3.0, 0.25)));
  std::filesystem::remove(path);
}

}  // TEST_SUITE
