#include "snls/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>

#include "snls/error.hpp"
#include "snls/fft.hpp"

namespace snls {
namespace {

constexpr double kQuarticRoot3 = 1.3160740129524924;  // 3^{1/4}

double hermite_cubic(double t, double h, double y0, double m0, double y1, double m1) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * m1;
}

// Townes ODE right-hand side for (Q, Q'); the r = 0 limit uses Q''(0) = (Q - Q^3)/2.
struct State {
  double q;
  double p;
};

State townes_rhs(double r, State s) {
  const double source = s.q - s.q * s.q * s.q;
  if (r == 0.0) return {s.p, 0.5 * source};
  return {s.p, -s.p / r + source};
}

double second_derivative(double r, double q, double p) {
  const double source = q - q * q * q;
  return r == 0.0 ? 0.5 * source : -p / r + source;
}

double third_derivative(double r, double q, double p) {
  if (r == 0.0) return 0.0;
  const double q2 = second_derivative(r, q, p);
  return -q2 / r + p / (r * r) + p - 3.0 * q * q * p;
}

struct Trajectory {
  std::vector<double> q;
  std::vector<double> p;
  int verdict = 0;  // +1 overshoot, -1 undershoot, 0 undecided
};

Trajectory integrate(double a, double h, int steps) {
  Trajectory tr;
  tr.q.reserve(static_cast<std::size_t>(steps) + 1);
  tr.p.reserve(static_cast<std::size_t>(steps) + 1);
  State s{a, 0.0};
  tr.q.push_back(s.q);
  tr.p.push_back(s.p);
  for (int i = 0; i < steps; ++i) {
    const double r = i * h;
    const State k1 = townes_rhs(r, s);
    const State k2 = townes_rhs(r + 0.5 * h, {s.q + 0.5 * h * k1.q, s.p + 0.5 * h * k1.p});
    const State k3 = townes_rhs(r + 0.5 * h, {s.q + 0.5 * h * k2.q, s.p + 0.5 * h * k2.p});
    const State k4 = townes_rhs(r + h, {s.q + h * k3.q, s.p + h * k3.p});
    s.q += h / 6.0 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q);
    s.p += h / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
    tr.q.push_back(s.q);
    tr.p.push_back(s.p);
    if (s.q < 0.0) {
      tr.verdict = 1;
      return tr;
    }
    if (s.p > 0.0) {
      tr.verdict = -1;
      return tr;
    }
  }
  return tr;
}

double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 3) return 0.0;
  double acc = f.front() + f.back();
  std::size_t last = n - 1;
  // Fall back to a trapezoid on the final panel when the count is even.
  double extra = 0.0;
  if (last % 2 == 1) {
    extra = 0.5 * h * (f[last - 1] + f[last]);
    --last;
    acc = f.front() + f[last];
  }
  for (std::size_t i = 1; i < last; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
  return acc * h / 3.0 + extra;
}

}  // namespace

RadialProfile RadialProfile::closed_form_1d() { return RadialProfile{}; }

RadialProfile RadialProfile::tabulated_2d(double step, std::vector<double> q,
                                          std::vector<double> dq, double tail_amplitude) {
  RadialProfile p;
  p.dim_ = 2;
  p.step_ = step;
  p.q_ = std::move(q);
  p.dq_ = std::move(dq);
  p.tail_amplitude_ = tail_amplitude;
  return p;
}

double RadialProfile::matching_radius() const {
  return dim_ == 1 ? std::numeric_limits<double>::infinity()
                   : step_ * static_cast<double>(q_.size() - 1);
}

double RadialProfile::value(double r) const {
  r = std::abs(r);
  if (dim_ == 1) {
    const double c = std::cosh(2.0 * r);
    return std::isfinite(c) ? kQuarticRoot3 / std::sqrt(c) : 0.0;
  }
  if (r >= matching_radius()) return tail_amplitude_ * std::cyl_bessel_k(0.0, r);
  const auto i = static_cast<std::size_t>(r / step_);
  const double t = r / step_ - static_cast<double>(i);
  return hermite_cubic(t, step_, q_[i], dq_[i], q_[i + 1], dq_[i + 1]);
}

double RadialProfile::d1(double r) const {
  const double sign = r < 0.0 ? -1.0 : 1.0;
  r = std::abs(r);
  if (dim_ == 1) return sign * -value(r) * std::tanh(2.0 * r);
  if (r >= matching_radius()) return sign * -tail_amplitude_ * std::cyl_bessel_k(1.0, r);
  const auto i = static_cast<std::size_t>(r / step_);
  const double t = r / step_ - static_cast<double>(i);
  const double r0 = static_cast<double>(i) * step_;
  const double r1 = r0 + step_;
  return sign * hermite_cubic(t, step_, dq_[i], second_derivative(r0, q_[i], dq_[i]), dq_[i + 1],
                              second_derivative(r1, q_[i + 1], dq_[i + 1]));
}

double RadialProfile::d2(double r) const {
  r = std::abs(r);
  if (dim_ == 1) {
    const double q = value(r);
    return q - q * q * q * q * q;
  }
  if (r >= matching_radius()) {
    return tail_amplitude_ * (std::cyl_bessel_k(0.0, r) + std::cyl_bessel_k(1.0, r) / r);
  }
  const auto i = static_cast<std::size_t>(r / step_);
  const double t = r / step_ - static_cast<double>(i);
  const double r0 = static_cast<double>(i) * step_;
  const double r1 = r0 + step_;
  return hermite_cubic(t, step_, second_derivative(r0, q_[i], dq_[i]),
                       third_derivative(r0, q_[i], dq_[i]),
                       second_derivative(r1, q_[i + 1], dq_[i + 1]),
                       third_derivative(r1, q_[i + 1], dq_[i + 1]));
}

ComplexField GroundState::as_complex() const {
  ComplexField f(grid);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = q[i];
  return f;
}

namespace {

GroundState lift(const Grid& grid, std::shared_ptr<const RadialProfile> profile) {
  GroundState gs;
  gs.grid = grid;
  gs.q = RealField(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.position(i);
    gs.q[i] = profile->value(grid.dim == 1 ? x[0] : std::hypot(x[0], x[1]));
  }
  const ComplexField qc = gs.as_complex();
  gs.mass = l2_norm_sq(qc);
  gs.gradnorm = gradient_norm_sq(qc);
  gs.central_value = profile->central_value();
  gs.profile = std::move(profile);
  return gs;
}

}  // namespace

GroundState ground_state_1d(const Grid& grid) {
  if (grid.dim != 1) throw Error(Errc::invalid_dimension, "ground_state_1d needs d = 1");
  return lift(grid, std::make_shared<RadialProfile>(RadialProfile::closed_form_1d()));
}

ShootingResult shoot_townes(double r_max, int n_r) {
  const double h = r_max / n_r;
  double lo = 2.0;
  double hi = 2.5;
  if (integrate(lo, h, n_r).verdict != -1 || integrate(hi, h, n_r).verdict != 1) {
    throw Error(Errc::shooting_bracket_failure, "Q(0) bracket [2.0, 2.5] does not straddle");
  }
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    const int verdict = integrate(mid, h, n_r).verdict;
    if (verdict == 1) {
      hi = mid;
    } else if (verdict == -1) {
      lo = mid;
    } else {
      break;  // reached r_max without departing: as good as the grid allows
    }
    if (mid == lo && mid == hi) break;
  }
  ShootingResult res;
  res.central_value = 0.5 * (lo + hi);
  res.bracket_width = hi - lo;

  const Trajectory t_lo = integrate(lo, h, n_r);
  const Trajectory t_hi = integrate(hi, h, n_r);
  const Trajectory t_mid = integrate(res.central_value, h, n_r);
  const std::size_t usable = std::min({t_lo.q.size(), t_hi.q.size(), t_mid.q.size()});
  std::size_t match = 1;
  // Trust the table while the bracketing solutions agree to 1e-6 relative.
  while (match + 1 < usable &&
         std::abs(t_lo.q[match + 1] - t_hi.q[match + 1]) < 1e-6 * t_mid.q[match + 1] &&
         t_mid.q[match + 1] > 0.0 && t_mid.p[match + 1] < 0.0) {
    ++match;
  }
  std::vector<double> q(t_mid.q.begin(), t_mid.q.begin() + static_cast<std::ptrdiff_t>(match + 1));
  std::vector<double> p(t_mid.p.begin(), t_mid.p.begin() + static_cast<std::ptrdiff_t>(match + 1));
  const double r_match = h * static_cast<double>(match);
  const double amplitude = q.back() / std::cyl_bessel_k(0.0, r_match);
  res.matching_radius = r_match;

  std::vector<double> integrand(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) integrand[i] = q[i] * q[i] * h * static_cast<double>(i);
  double mass = simpson(integrand, h);
  const int tail_steps = 40000;
  const double tail_h = 40.0 / tail_steps;
  std::vector<double> tail(static_cast<std::size_t>(tail_steps) + 1);
  for (int i = 0; i <= tail_steps; ++i) {
    const double r = r_match + i * tail_h;
    tail[static_cast<std::size_t>(i)] = std::pow(amplitude * std::cyl_bessel_k(0.0, r), 2) * r;
  }
  mass += simpson(tail, tail_h);
  res.mass = 2.0 * std::numbers::pi * mass;
  res.profile = RadialProfile::tabulated_2d(h, std::move(q), std::move(p), amplitude);
  return res;
}

RealField townes_petviashvili(const Grid& grid, double tol, int max_iter) {
  if (grid.dim != 2) throw Error(Errc::invalid_dimension, "Petviashvili check runs in 2d");
  const std::size_t total = grid.size();
  const auto nn = static_cast<std::size_t>(grid.n);
  std::vector<double> symbol(total);
  for (std::size_t i = 0; i < total; ++i) {
    const double kx = grid.wavenumber(static_cast<int>(i / nn));
    const double ky = grid.wavenumber(static_cast<int>(i % nn));
    symbol[i] = 1.0 + kx * kx + ky * ky;
  }
  ComplexField q(grid);
  for (std::size_t i = 0; i < total; ++i) {
    const Point x = grid.position(i);
    q[i] = 2.2 / std::cosh(std::hypot(x[0], x[1]));
  }
  ComplexField qhat(grid), nhat(grid), next(grid);
  for (int iter = 0; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i < total; ++i) nhat[i] = q[i] * q[i] * q[i];
    fft::forward(q.values, qhat.values, 2, grid.n);
    fft::forward(nhat);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      num += symbol[i] * std::norm(qhat[i]);
      den += (std::conj(qhat[i]) * nhat[i]).real();
    }
    const double factor = std::pow(num / den, 1.5);
    for (std::size_t i = 0; i < total; ++i) next[i] = factor * nhat[i] / symbol[i];
    fft::inverse(next);
    double change = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      next[i] = next[i].real() / static_cast<double>(total);
      change = std::max(change, std::abs(next[i] - q[i]));
    }
    std::swap(q.values, next.values);
    if (change < tol) break;
  }
  RealField out(grid);
  for (std::size_t i = 0; i < total; ++i) out[i] = q[i].real();
  return out;
}

GroundState ground_state_2d(const Grid& grid, double r_max, int n_r) {
  if (grid.dim != 2) throw Error(Errc::invalid_dimension, "ground_state_2d needs d = 2");
  ShootingResult shot = shoot_townes(r_max, n_r);
  const Grid check = make_grid(2, 12.0, 256);
  const RealField pv = townes_petviashvili(check);
  double pv_mass = 0.0;
  for (double v : pv.values) pv_mass += v * v;
  pv_mass *= check.cell_volume();
  if (std::abs(pv_mass - shot.mass) > 1e-4) {
    throw Error(Errc::solver_disagreement,
                "shooting mass " + std::to_string(shot.mass) + " vs renormalized iteration " +
                    std::to_string(pv_mass));
  }
  return lift(grid, std::make_shared<RadialProfile>(std::move(shot.profile)));
}

GroundState ground_state(const Grid& grid) {
  return grid.dim == 1 ? ground_state_1d(grid) : ground_state_2d(grid);
}

double elliptic_residual(const GroundState& gs, double radius) {
  const ComplexField q = gs.as_complex();
  const ComplexField lap = spectral_laplacian(q);
  const double power = gs.grid.dim == 1 ? 4.0 : 2.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Point x = gs.grid.position(i);
    if (std::hypot(x[0], gs.grid.dim == 1 ? 0.0 : x[1]) >= radius) continue;
    const double v = gs.q[i];
    worst = std::max(worst, std::abs(lap[i].real() - v + std::pow(v, power) * v));
  }
  return worst;
}

double profile_residual(const GroundState& gs) {
  const RadialProfile& prof = *gs.profile;
  const double power = gs.grid.dim == 1 ? 4.0 : 2.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < gs.q.size(); ++i) {
    const Point x = gs.grid.position(i);
    const double r = std::hypot(x[0], gs.grid.dim == 1 ? 0.0 : x[1]);
    const double v = prof.value(r);
    double lap = prof.d2(r);
    if (gs.grid.dim == 2) lap += r > 0.0 ? prof.d1(r) / r : prof.d2(0.0);
    worst = std::max(worst, std::abs(lap - v + std::pow(v, power) * v));
  }
  return worst;
}

ComplexField qb_profile(double b, const RadialProfile& profile, const Grid& grid) {
  if (!(std::abs(b) < 0.5)) throw Error(Errc::b_out_of_range, "|b| must be below 0.5");
  ComplexField f(grid);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Point y = grid.position(i);
    const double r2 = grid.dim == 1 ? y[0] * y[0] : y[0] * y[0] + y[1] * y[1];
    const double phase = -0.25 * b * r2;
    f[i] = profile.value(std::sqrt(r2)) * cplx(std::cos(phase), std::sin(phase));
  }
  return f;
}

ComplexField qb_profile(double b, const GroundState& gs) {
  return qb_profile(b, *gs.profile, gs.grid);
}

ComplexField apply_lambda(const ComplexField& f, int power) {
  ComplexField out = f;
  const Grid& g = f.grid;
  for (int p = 0; p < power; ++p) {
    const auto grad = spectral_gradient(out);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Point y = g.position(i);
      cplx acc = 0.5 * g.dim * out[i];
      for (int a = 0; a < g.dim; ++a) acc += (y[a] - g.center[a]) * grad[a][i];
      out[i] = acc;
    }
  }
  return out;
}

double gamma_b(double b) {
  if (!(b > 0.0)) throw Error(Errc::nonpositive_b, "Gamma_b needs b > 0");
  return std::exp(-std::numbers::pi / b);
}

double log_gamma_b(double b) {
  if (!(b > 0.0)) throw Error(Errc::nonpositive_b, "Gamma_b needs b > 0");
  return -std::numbers::pi / b;
}

void write_profile_csv(const RadialProfile& profile, double r_max, int samples,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot open " + path.string());
  out << "r,Q\n" << std::setprecision(17);
  for (int i = 0; i <= samples; ++i) {
    const double r = r_max * i / samples;
    out << r << ',' << profile.value(r) << '\n';
  }
}

}  // namespace snls
