#include "snls/modulation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "snls/diagnostics.hpp"
#include "snls/error.hpp"

namespace snls {
namespace {

constexpr cplx kI{0.0, 1.0};

struct WindowPoint {
  std::size_t idx;
  Point y;
};

// Grid points with |x - x_c| < radius (periodic), with y = (x - x_c)/lambda.
std::vector<WindowPoint> window_points(const Grid& g, Point x_c, double lambda, double radius_y) {
  const double radius = radius_y * lambda;
  const double dx = g.dx();
  const auto n = static_cast<std::size_t>(g.n);
  std::vector<std::vector<std::pair<std::size_t, double>>> axes(static_cast<std::size_t>(g.dim));
  for (int a = 0; a < g.dim; ++a) {
    auto& list = axes[static_cast<std::size_t>(a)];
    if (radius >= g.half_width) {
      for (std::size_t i = 0; i < n; ++i) {
        list.emplace_back(i, wrap_displacement(g.coord(static_cast<int>(i), a), x_c[a],
                                               g.half_width));
      }
      continue;
    }
    const double left = x_c[a] - radius - (g.center[a] - g.half_width);
    const auto first = static_cast<long long>(std::floor(left / dx));
    const auto count = static_cast<long long>(std::ceil(2.0 * radius / dx)) + 2;
    for (long long m = first; m < first + count; ++m) {
      const auto i = static_cast<std::size_t>(((m % g.n) + g.n) % g.n);
      const double disp = wrap_displacement(g.coord(static_cast<int>(i), a), x_c[a], g.half_width);
      if (std::abs(disp) < radius) list.emplace_back(i, disp);
    }
  }
  std::vector<WindowPoint> pts;
  if (g.dim == 1) {
    pts.reserve(axes[0].size());
    for (const auto& [i, d] : axes[0]) pts.push_back({i, {d / lambda, 0.0}});
    return pts;
  }
  for (const auto& [i, d0] : axes[0]) {
    for (const auto& [j, d1] : axes[1]) {
      if (d0 * d0 + d1 * d1 >= radius * radius) continue;
      pts.push_back({i * n + j, {d0 / lambda, d1 / lambda}});
    }
  }
  return pts;
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

int unknowns(int dim) { return dim + 3; }

// Parameter vector layout: lambda, b, x_c (d entries), gamma.
Eigen::VectorXd pack(const ModulationParams& p, int dim) {
  Eigen::VectorXd v(unknowns(dim));
  v[0] = p.lambda;
  v[1] = p.b;
  for (int a = 0; a < dim; ++a) v[2 + a] = p.x_c[a];
  v[2 + dim] = p.gamma;
  return v;
}

ModulationParams unpack(const Eigen::VectorXd& v, int dim) {
  ModulationParams p;
  p.lambda = v[0];
  p.b = v[1];
  for (int a = 0; a < dim; ++a) p.x_c[a] = v[2 + a];
  p.gamma = v[2 + dim];
  return p;
}

Eigen::VectorXd scales(const ModulationParams& p, int dim) {
  Eigen::VectorXd s = Eigen::VectorXd::Ones(unknowns(dim));
  s[0] = p.lambda;
  for (int a = 0; a < dim; ++a) s[2 + a] = p.lambda;
  return s;
}

Eigen::VectorXd residual_vector(const ComplexField& u, const ModulationParams& p,
                                const RadialProfile& profile, double window) {
  const auto r = residuals_at(u, p, profile, window);
  return Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
}

// Central-difference Jacobian with respect to the normalized unknowns p_j / scale_j.
Eigen::MatrixXd jacobian(const ComplexField& u, const ModulationParams& p,
                         const RadialProfile& profile, double fd_step, double window) {
  const int dim = u.grid.dim;
  const int m = unknowns(dim);
  const Eigen::VectorXd base = pack(p, dim);
  const Eigen::VectorXd sc = scales(p, dim);
  Eigen::MatrixXd J(m, m);
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd plus = base;
    Eigen::VectorXd minus = base;
    plus[j] += fd_step * sc[j];
    minus[j] -= fd_step * sc[j];
    J.col(j) = (residual_vector(u, unpack(plus, dim), profile, window) -
                residual_vector(u, unpack(minus, dim), profile, window)) /
               (2.0 * fd_step);
  }
  return J;
}

double condition_number(const Eigen::MatrixXd& J) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& sv = svd.singularValues();
  const double smallest = sv[sv.size() - 1];
  return smallest > 0.0 ? sv[0] / smallest : std::numeric_limits<double>::infinity();
}

void fill_remainder(ModulationState& st, const ComplexField& u, const RadialProfile& profile,
                    double window) {
  const Grid& g = u.grid;
  const double scale = std::pow(st.lambda, -0.5 * g.dim);
  const cplx rot = std::polar(1.0, -st.gamma);
  st.eps = ComplexField(g);
  for (std::size_t i = 0; i < u.size(); ++i) st.eps[i] = rot * u[i];
  std::vector<cplx> f(5);
  for (const auto& pt : window_points(g, st.x_c, st.lambda, window)) {
    cplx qb;
    modulation_test_functions(profile, st.b, pt.y, g.dim, f.data(), &qb);
    st.eps[pt.idx] -= scale * qb;
  }
  st.eps_l2 = l2_norm(st.eps);
  st.eps_weighted = weighted_eps_norm_physical(st.eps, st.lambda, st.x_c);
}

}  // namespace

std::string to_string(ModulationStatus s) {
  switch (s) {
    case ModulationStatus::ok: return "ok";
    case ModulationStatus::eps_too_large: return "eps_too_large";
    case ModulationStatus::newton_divergence: return "newton_divergence";
    case ModulationStatus::not_run: return "not_run";
  }
  return "unknown";
}

double ModulationState::residual_max() const {
  double m = 0.0;
  for (double r : residuals) m = std::max(m, std::abs(r));
  return m;
}

ComplexField ModulationState::eps_on(const Grid& ygrid) const {
  Grid lattice = ygrid;
  lattice.half_width = lambda * ygrid.half_width;
  lattice.center = {x_c[0] + lambda * ygrid.center[0], x_c[1] + lambda * ygrid.center[1]};
  ComplexField out = evaluate_on_lattice(eps, lattice);
  out.grid = ygrid;
  const double scale = std::pow(lambda, 0.5 * ygrid.dim);
  for (auto& v : out.values) v *= scale;
  return out;
}

void modulation_test_functions(const RadialProfile& profile, double b, Point y, int dim,
                               cplx* out, cplx* qb) {
  const double r2 = dim == 1 ? y[0] * y[0] : y[0] * y[0] + y[1] * y[1];
  const double r = std::sqrt(r2);
  const double q = profile.value(r);
  const double q1 = profile.d1(r);
  const double q2 = profile.d2(r);
  const double h = 0.5 * dim;
  const double lq = h * q + r * q1;
  const double l2q = h * lq + r * ((h + 1.0) * q1 + r * q2);
  const cplx phase = std::polar(1.0, -0.25 * b * r2);
  const cplx qt = q * phase;
  const cplx g = lq - kI * (0.5 * b * r2 * q);
  const cplx lg = l2q - kI * (0.5 * b) * (r2 * lq + 2.0 * r2 * q);
  out[0] = r2 * qt;
  for (int a = 0; a < dim; ++a) out[1 + a] = y[a] * qt;
  out[1 + dim] = kI * phase * g;
  out[2 + dim] = kI * phase * (lg - kI * (0.5 * b * r2) * g);
  if (qb) *qb = qt;
}

std::vector<double> orthogonality_residuals(const ComplexField& eps, double b,
                                            const RadialProfile& profile) {
  const Grid& g = eps.grid;
  const int m = unknowns(g.dim);
  std::vector<double> res(static_cast<std::size_t>(m), 0.0);
  std::vector<cplx> f(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (eps[i] == cplx{}) continue;
    const Point x = g.position(i);
    const Point y{x[0] - g.center[0], g.dim == 2 ? x[1] - g.center[1] : 0.0};
    modulation_test_functions(profile, b, y, g.dim, f.data());
    for (int j = 0; j < m; ++j) res[j] += (f[j] * std::conj(eps[i])).real();
  }
  for (double& v : res) v *= g.cell_volume();
  return res;
}

std::vector<double> residuals_at(const ComplexField& u, const ModulationParams& p,
                                 const RadialProfile& profile, double window) {
  const Grid& g = u.grid;
  const int m = unknowns(g.dim);
  const double scale = std::pow(p.lambda, -0.5 * g.dim);
  const cplx rot = std::polar(1.0, -p.gamma);
  std::vector<double> res(static_cast<std::size_t>(m), 0.0);
  std::vector<cplx> f(static_cast<std::size_t>(m));
  for (const auto& pt : window_points(g, p.x_c, p.lambda, window)) {
    cplx qb;
    modulation_test_functions(profile, p.b, pt.y, g.dim, f.data(), &qb);
    const cplx eps = rot * u[pt.idx] - scale * qb;
    for (int j = 0; j < m; ++j) res[j] += (f[j] * std::conj(eps)).real();
  }
  for (double& v : res) v *= scale * g.cell_volume();
  return res;
}

double jacobian_condition(const ComplexField& u, const ModulationParams& p,
                          const RadialProfile& profile, double fd_step) {
  return condition_number(jacobian(u, p, profile, fd_step, 40.0));
}

ModulationParams initial_guess(const ComplexField& u, const GroundState& gs) {
  const Grid& g = u.grid;
  std::size_t peak = 0;
  double peak_val = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = std::norm(u[i]);
    if (a > peak_val) {
      peak_val = a;
      peak = i;
    }
  }
  const double grad = gradient_norm_sq(u);
  if (!(peak_val > 0.0) || !(grad > 0.0)) throw Error(Errc::flat_field, "field has no peak");

  ModulationParams p;
  p.lambda = std::sqrt(gs.gradnorm / grad);
  const Point x_peak = g.position(peak);

  double w = 0.0;
  Point shift{0.0, 0.0};
  for (const auto& pt : window_points(g, x_peak, p.lambda, 3.0)) {
    const double a = std::norm(u[pt.idx]);
    w += a;
    for (int k = 0; k < g.dim; ++k) shift[k] += a * pt.y[k] * p.lambda;
  }
  for (int k = 0; k < g.dim; ++k) p.x_c[k] = x_peak[k] + shift[k] / w;
  p.gamma = std::arg(u[peak]);

  const auto grad_u = spectral_gradient(u);
  double num = 0.0;
  double den = 0.0;
  for (const auto& pt : window_points(g, p.x_c, p.lambda, 10.0)) {
    cplx radial{};
    double r2 = 0.0;
    for (int k = 0; k < g.dim; ++k) {
      const double disp = pt.y[k] * p.lambda;
      radial += disp * grad_u[static_cast<std::size_t>(k)][pt.idx];
      r2 += disp * disp;
    }
    num += (std::conj(u[pt.idx]) * radial).imag();
    den += r2 * std::norm(u[pt.idx]);
  }
  p.b = den > 0.0 ? -2.0 * p.lambda * p.lambda * num / den : 0.0;
  p.b = std::clamp(p.b, -0.49, 0.49);
  return p;
}

ModulationState decompose(const ComplexField& u, const ModulationParams& guess,
                          const GroundState& gs, const DecomposeOptions& opts) {
  const RadialProfile& profile = *gs.profile;
  const int dim = u.grid.dim;
  const double target = opts.tol * gs.mass;
  ModulationParams p = guess;
  ModulationState st;
  Eigen::VectorXd F = residual_vector(u, p, profile, opts.window);
  double fnorm = F.norm();
  bool converged = fnorm < target;
  int polish = 0;
  int iter = 0;
  Eigen::MatrixXd J;
  for (; iter < opts.max_iter; ++iter) {
    if (converged && polish >= 2) break;
    J = jacobian(u, p, profile, opts.fd_step, opts.window);
    const Eigen::VectorXd dq = J.colPivHouseholderQr().solve(-F);
    const Eigen::VectorXd sc = scales(p, dim);
    const Eigen::VectorXd base = pack(p, dim);
    double step = 1.0;
    bool accepted = false;
    for (int tries = 0; tries < 30; ++tries, step *= 0.5) {
      const Eigen::VectorXd trial = base + step * dq.cwiseProduct(sc);
      if (!(trial[0] > 0.0) || !std::isfinite(trial.sum())) continue;
      const ModulationParams pt = unpack(trial, dim);
      const Eigen::VectorXd Ft = residual_vector(u, pt, profile, opts.window);
      if (Ft.norm() < fnorm) {
        p = pt;
        F = Ft;
        fnorm = Ft.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (converged) ++polish;
    converged = converged || fnorm < target;
  }
  if (J.size() == 0) J = jacobian(u, p, profile, opts.fd_step, opts.window);

  st.lambda = p.lambda;
  st.b = p.b;
  st.x_c = p.x_c;
  for (int a = 0; a < dim; ++a) {
    st.x_c[a] = u.grid.center[a] +
                wrap_displacement(st.x_c[a], u.grid.center[a], u.grid.half_width);
  }
  st.gamma = wrap_angle(p.gamma);
  st.residuals.assign(F.data(), F.data() + F.size());
  st.iterations = iter;
  st.converged = converged;
  st.jacobian_condition = condition_number(J);
  fill_remainder(st, u, profile, opts.window);
  if (!converged) {
    st.status = ModulationStatus::newton_divergence;
  } else if (!(st.eps_l2 + st.b < opts.alpha)) {
    st.status = ModulationStatus::eps_too_large;
  } else {
    st.status = ModulationStatus::ok;
  }
  st.valid = st.status == ModulationStatus::ok;
  return st;
}

ComplexField ansatz_field(const ModulationParams& p, const RadialProfile& profile,
                          const Grid& grid) {
  ComplexField out(grid);
  const double scale = std::pow(p.lambda, -0.5 * grid.dim);
  const cplx rot = std::polar(1.0, p.gamma);
  std::vector<cplx> f(5);
  for (const auto& pt : window_points(grid, p.x_c, p.lambda, 40.0)) {
    cplx qb;
    modulation_test_functions(profile, p.b, pt.y, grid.dim, f.data(), &qb);
    out[pt.idx] = rot * scale * qb;
  }
  return out;
}

ComplexField reconstruct(const ModulationState& state, const GroundState& gs) {
  ComplexField out = ansatz_field({state.lambda, state.b, state.x_c, 0.0}, *gs.profile,
                                  state.eps.grid);
  const cplx rot = std::polar(1.0, state.gamma);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rot * (out[i] + state.eps[i]);
  return out;
}

bool ConstraintReport::all() const {
  return b_positive && smallness && lambda_bound && weighted_bound && energy_bound &&
         momentum_bound;
}

InitialData build_initial_data(const InitialConfig& spec, const GroundState& gs,
                               const Grid& grid, double alpha) {
  if (!(spec.lambda0 > 0.0)) throw Error(Errc::invalid_spec, "lambda0 must be positive");
  if (!(spec.b0 > 0.0)) throw Error(Errc::invalid_spec, "b0 must be positive");
  const RadialProfile& profile = *gs.profile;
  const int dim = grid.dim;
  const int m = unknowns(dim);
  const double lambda = spec.lambda0;
  const double scale = std::pow(lambda, -0.5 * dim);
  const auto pts = window_points(grid, spec.x0, lambda, 40.0);

  // Raw recipe in the y-frame, then its projection onto the orthogonality constraints.
  std::vector<cplx> raw(pts.size(), cplx{});
  if (spec.eps != EpsRecipe::zero) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point y = pts[i].y;
      const double r2 = y[0] * y[0] + (dim == 2 ? y[1] * y[1] : 0.0);
      raw[i] = spec.eps_amplitude *
               (spec.eps == EpsRecipe::q_multiple ? profile.value(std::sqrt(r2)) : std::exp(-r2));
    }
  }
  std::vector<std::vector<cplx>> tests(pts.size(), std::vector<cplx>(static_cast<std::size_t>(m)));
  std::vector<cplx> qb(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    modulation_test_functions(profile, spec.b0, pts[i].y, dim, tests[i].data(), &qb[i]);
  }
  if (spec.eps != EpsRecipe::zero) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (int a = 0; a < m; ++a) {
        rhs[a] += (tests[i][a] * std::conj(raw[i])).real();
        for (int c = 0; c < m; ++c) G(a, c) += (tests[i][a] * std::conj(tests[i][c])).real();
      }
    }
    const Eigen::VectorXd coef = G.ldlt().solve(rhs);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (int c = 0; c < m; ++c) raw[i] -= coef[c] * tests[i][c];
    }
  }

  InitialData out;
  out.u0 = ComplexField(grid);
  out.eps0 = ComplexField(grid);
  const cplx rot = std::polar(1.0, spec.gamma0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.eps0[pts[i].idx] = scale * raw[i];
    out.u0[pts[i].idx] = rot * scale * (qb[i] + raw[i]);
  }

  ConstraintReport& rep = out.report;
  rep.b_positive = spec.b0 > 0.0;
  rep.eps_l2 = l2_norm(out.eps0);
  rep.smallness = rep.eps_l2 + spec.b0 < alpha;
  rep.log_lambda0 = std::log(lambda);
  rep.log_lambda_bound = -std::exp(0.8 * std::numbers::pi / spec.b0);
  rep.lambda_bound = rep.log_lambda0 <= rep.log_lambda_bound;
  rep.eps_weighted = weighted_eps_norm_physical(out.eps0, lambda, spec.x0);
  rep.log_weighted_bound = -0.8 * std::numbers::pi / spec.b0;
  rep.weighted_bound =
      rep.eps_weighted == 0.0 || std::log(rep.eps_weighted) < rep.log_weighted_bound;
  rep.energy = energy(out.u0);
  rep.energy_bound = std::abs(rep.energy) <= 1000.0;
  rep.momentum = norm(momentum(out.u0));
  rep.momentum_bound = rep.momentum <= 1000.0;
  return out;
}

std::vector<SeriesPoint> series(const std::vector<ModulationSample>& samples) {
  std::vector<ModulationSample> v;
  for (const auto& s : samples) {
    if (s.valid) v.push_back(s);
  }
  if (v.size() < 3) throw Error(Errc::insufficient_samples, "series needs three valid samples");
  std::vector<SeriesPoint> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == v.size() ? i : i + 1;
    const double ds = v[hi].s - v[lo].s;
    SeriesPoint& p = out[i];
    p.t = v[i].t;
    p.s = v[i].s;
    p.lambda = v[i].lambda;
    p.b = v[i].b;
    if (ds != 0.0) {
      p.b_s = (v[hi].b - v[lo].b) / ds;
      p.minus_lambda_s_over_lambda = -(std::log(v[hi].lambda) - std::log(v[lo].lambda)) / ds;
    }
  }
  return out;
}

}  // namespace snls
