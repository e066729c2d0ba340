#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "snls/error.hpp"
#include "snls/noise.hpp"

using namespace snls;

namespace {

PhiFamily unit_bump_1d() { return {1, {{1.0, {0.0, 0.0}, 1.0}}}; }

PhiFamily two_bumps_1d() {
  return {1, {{1.0, {0.0, 0.0}, 1.0}, {0.5, {0.5, 0.0}, 0.7}}};
}

// Offline calibration over seeds 1..100: family (1.0 at 0, sigma 1; 0.5 at 0.5,
// sigma 0.7) scaled by 0.05, grid L = 3, N = 64, horizon 1, base step 1/64.
struct Calibration {
  double typical = 0.0;
  double rejected = 0.0;
};

Calibration read_calibration() {
  std::ifstream in(std::string(SNLS_FIXTURE_DIR) + "/noise_calibration.txt");
  Calibration c;
  std::string key;
  while (in >> key) {
    if (key == "typical") in >> c.typical;
    else if (key == "rejected_fraction") in >> c.rejected;
  }
  return c;
}

}  // namespace

TEST_SUITE("noise") {

TEST_CASE("Brownian paths start at zero") {
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    NoiseRealization noise(two_bumps_1d(), 1.0 / 64.0, seed);
    CHECK(noise.brownian(0, 0) == 0.0);
    CHECK(noise.brownian(1, 0) == 0.0);
  }
}

TEST_CASE("B_1(1) has unit variance") {
  const int samples = 10000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < samples; ++i) {
    NoiseRealization noise(unit_bump_1d(), 1.0 / 64.0, static_cast<std::uint64_t>(i));
    const double b = noise.brownian(0, noise.tick_of(1.0));
    s += b;
    s2 += b * b;
  }
  const double mean = s / samples;
  const double var = (s2 - samples * mean * mean) / (samples - 1);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("same seed gives identical paths") {
  const std::vector<double> times{0.0, 1.0 / 64, 3.0 / 128, 0.5, 1.0};
  const auto a = sample_brownian(two_bumps_1d(), times, 42);
  const auto b = sample_brownian(two_bumps_1d(), times, 42);
  CHECK(a.bpaths == b.bpaths);
  const auto c = sample_brownian(two_bumps_1d(), times, 43);
  CHECK(a.bpaths != c.bpaths);
}

TEST_CASE("sample_brownian rejects bad grids") {
  const std::vector<double> empty;
  CHECK_THROWS_AS(sample_brownian(unit_bump_1d(), empty, 1), Error);
  try {
    sample_brownian(unit_bump_1d(), empty, 1);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_time_grid);
  }
  const std::vector<double> off{0.0, 0.01};
  try {
    sample_brownian(unit_bump_1d(), off, 1);
    FAIL("off-lattice time accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::off_grid_time);
  }
}

TEST_CASE("refinement keeps coarse nodes bitwise") {
  NoiseRealization fine(two_bumps_1d(), 1.0 / 64.0, 5);
  // Touch a deep node first so the bridge tree is built before the coarse lookups.
  const Tick deep = 37 * (kTicksPerBase >> 9);
  const double deep_value = fine.brownian(0, deep);
  NoiseRealization coarse(two_bumps_1d(), 1.0 / 64.0, 5);
  for (Tick t : {Tick{0}, kTicksPerBase / 2, kTicksPerBase, 3 * kTicksPerBase / 4, 5 * kTicksPerBase}) {
    CHECK(fine.brownian_all(t) == coarse.brownian_all(t));
  }
  CHECK(coarse.brownian(0, deep) == deep_value);

  const std::vector<double> t1{0.0, 1.0 / 64, 2.0 / 64};
  const std::vector<double> t2{0.0, 1.0 / 128, 1.0 / 64, 3.0 / 128, 2.0 / 64};
  const auto a = sample_brownian(two_bumps_1d(), t1, 9);
  const auto b = sample_brownian(two_bumps_1d(), t2, 9);
  CHECK(a.bpaths[1] == b.bpaths[2]);
  CHECK(a.bpaths[2] == b.bpaths[4]);
}

TEST_CASE("eval_W") {
  const Grid g = make_grid(1, 10.0, 64);
  NoiseRealization noise(two_bumps_1d(), 1.0 / 64.0, 3);
  const RealField w0 = eval_W(noise, 0.0, g);
  CHECK(*std::max_element(w0.values.begin(), w0.values.end()) == 0.0);
  CHECK(*std::min_element(w0.values.begin(), w0.values.end()) == 0.0);
  CHECK_THROWS_AS(eval_W(noise, 0.01, g), Error);

  // Linearity: W at a node equals sum_k phi_k B_k.
  const Tick t = 3 * kTicksPerBase;
  const RealField w = eval_W(noise, t, g);
  const auto b = noise.brownian_all(t);
  const PhiFamily& phi = noise.phi();
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.position(i);
    err = std::max(err, std::abs(w[i] - (b[0] * phi.value(0, x) + b[1] * phi.value(1, x))));
  }
  CHECK(err < 1e-15);

  const PhiOnGrid on_grid(phi, g);
  std::vector<double> out(g.size());
  on_grid.combine(std::vector<double>{2.0, -1.0}, out);
  err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.position(i);
    err = std::max(err, std::abs(out[i] - (2.0 * phi.value(0, x) - phi.value(1, x))));
  }
  CHECK(err < 1e-15);
}

TEST_CASE("coefficients at t = 0") {
  const Grid g = make_grid(1, 10.0, 64);
  NoiseRealization noise(two_bumps_1d(), 1.0 / 64.0, 3);
  const auto c0 = eval_coeffs(noise, 0.0, g);
  const auto c1 = eval_coeffs(noise, 1.0, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(c0.beta[0][i] == 0.0);
    CHECK(c0.c[i] == cplx{});
    CHECK(c0.mu[i] == c1.mu[i]);
  }
}

TEST_CASE("single bump closed forms") {
  const Grid g = make_grid(1, 10.0, 128);
  const double b0 = 0.7;
  const auto co = eval_coeffs(unit_bump_1d(), std::vector<double>{b0}, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.position(i)[0];
    const double e = std::exp(-0.5 * x * x);
    CHECK(co.beta[0][i] == doctest::Approx(-2.0 * b0 * x * e).epsilon(1e-13));
    CHECK(co.c[i].real() == doctest::Approx(-b0 * b0 * x * x * e * e).epsilon(1e-13));
    CHECK(co.c[i].imag() == doctest::Approx(b0 * (x * x - 1.0) * e).epsilon(1e-13));
    CHECK(co.mu[i] == doctest::Approx(0.5 * e * e).epsilon(1e-13));
  }
}

TEST_CASE("Re c is nonpositive along a path") {
  const Grid g = make_grid(2, 5.0, 32);
  PhiFamily phi{2, {{1.0, {0.0, 0.0}, 1.0}, {-0.7, {1.0, -0.5}, 0.6}, {0.4, {-1.0, 1.0}, 1.4}}};
  NoiseRealization noise(phi, 1.0 / 64.0, 17);
  for (int j = 0; j <= 64; j += 8) {
    const auto co = eval_coeffs(noise, j * kTicksPerBase, g);
    double worst = -1.0;
    for (const auto& v : co.c.values) worst = std::max(worst, v.real());
    CHECK(worst <= 0.0);
  }
}

TEST_CASE("M-norm") {
  const Grid g = make_grid(1, 10.0, 256);
  const PhiFamily phi = unit_bump_1d();
  const MNorm zero = m_norm(phi, std::vector<double>{0.0}, g);
  CHECK(zero.max() == 0.0);
  CHECK(zero.sum() == 0.0);

  const MNorm one = m_norm(phi, std::vector<double>{0.8}, g);
  const MNorm two = m_norm(phi, std::vector<double>{1.6}, g);
  CHECK(two.beta[0] == doctest::Approx(2.0 * one.beta[0]).epsilon(1e-13));
  CHECK(two.c_real == doctest::Approx(4.0 * one.c_real).epsilon(1e-13));
  CHECK(two.c_imag == doctest::Approx(2.0 * one.c_imag).epsilon(1e-13));
}

TEST_CASE("M-norm against a dense-grid oracle") {
  // phi = e^{-x^2/2}, B = 1: beta = 2 phi', Re c = -phi'^2, Im c = phi''.
  // Derivatives written out by hand and sampled 10x finer than the solver grid.
  auto he = [](int n, double x) {
    switch (n) {
      case 0: return 1.0;
      case 1: return x;
      case 2: return x * x - 1.0;
      case 3: return x * x * x - 3.0 * x;
      default: return x * x * x * x - 6.0 * x * x + 3.0;
    }
  };
  auto dphi = [&](int n, double x) { return (n % 2 ? -1.0 : 1.0) * he(n, x) * std::exp(-0.5 * x * x); };
  auto re_c = [](int n, double x) {
    const double e = std::exp(-x * x);
    if (n == 0) return -x * x * e;
    if (n == 1) return -(2.0 * x - 2.0 * x * x * x) * e;
    return -(2.0 - 10.0 * x * x + 4.0 * x * x * x * x) * e;
  };
  double beta_sup = 0.0, c_sup = 0.0;
  const int dense = 2560;
  for (int i = 0; i < dense; ++i) {
    const double x = -10.0 + i * 20.0 / dense;
    for (int a = 0; a <= 2; ++a) {
      const double w = std::pow(std::abs(x), a);
      for (int b = 0; b <= 2; ++b) {
        beta_sup = std::max(beta_sup, w * std::abs(2.0 * dphi(b + 1, x)));
        c_sup = std::max(c_sup, w * std::hypot(re_c(b, x), dphi(b + 2, x)));
      }
    }
  }
  const MNorm m = m_norm(unit_bump_1d(), std::vector<double>{1.0}, make_grid(1, 10.0, 256));
  CHECK(std::abs(m.beta[0] - beta_sup) < 0.05 * beta_sup);
  CHECK(std::abs(m.c - c_sup) < 0.05 * c_sup);
}

TEST_CASE("path bound") {
  const Grid g = make_grid(1, 5.0, 64);
  PhiFamily silent{1, {{0.0, {0.0, 0.0}, 1.0}}};
  NoiseRealization quiet(silent, 1.0 / 64.0, 4);
  const auto r = check_path_bound(quiet, 1.0, 1.0, g);
  CHECK(r.ok);
  CHECK(r.worst == 0.0);

  NoiseRealization loud(two_bumps_1d(), 1.0 / 64.0, 4);
  CHECK_FALSE(check_path_bound(loud, 1.0, 0.0, g).ok);
}

TEST_CASE("path bound calibration") {
  const Calibration ref = read_calibration();
  REQUIRE(ref.typical > 0.0);
  PhiFamily phi = two_bumps_1d();
  for (auto& b : phi.bumps) b.amplitude *= 0.05;
  const Grid g = make_grid(1, 3.0, 64);
  std::vector<double> worst;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    NoiseRealization noise(phi, 1.0 / 64.0, seed);
    worst.push_back(check_path_bound(noise, 1.0, 0.0, g).worst);
  }
  std::vector<double> sorted = worst;
  std::sort(sorted.begin(), sorted.end());
  const double typical = 0.5 * (sorted[49] + sorted[50]);
  CHECK(typical == doctest::Approx(ref.typical).epsilon(1e-9));
  int rejected = 0;
  for (double w : worst) rejected += w > 3.0 * typical;
  const double fraction = rejected / 100.0;
  CHECK(fraction == doctest::Approx(ref.rejected).epsilon(1e-12));
  CHECK(fraction < 0.10);
}

}  // TEST_SUITE
