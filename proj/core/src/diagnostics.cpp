#include "snls/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "snls/error.hpp"

namespace snls {

double energy(const ComplexField& u) {
  const int d = u.grid.dim;
  const double p = d == 1 ? 3.0 : 2.0;  // |u|^{2+4/d} = (|u|^2)^p
  double pot = 0.0;
  for (const auto& v : u.values) pot += std::pow(std::norm(v), p);
  return 0.5 * gradient_norm_sq(u) - pot * u.grid.cell_volume() / (2.0 * p);
}

std::vector<double> momentum(const ComplexField& u) {
  const auto grad = spectral_gradient(u);
  std::vector<double> out(grad.size(), 0.0);
  for (std::size_t a = 0; a < grad.size(); ++a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += (std::conj(u[i]) * grad[a][i]).imag();
    out[a] = acc * u.grid.cell_volume();
  }
  return out;
}

double norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double TrajectoryRow::gamma_b() const { return b > 0.0 ? std::exp(-std::numbers::pi / b) : 0.0; }

DriftReport check_energy_drift(const std::vector<TrajectoryRow>& rows) {
  if (rows.size() < 2) throw Error(Errc::insufficient_samples, "drift check needs two rows");
  DriftReport rep;
  const double e0 = rows.front().energy;
  const auto& p0 = rows.front().momentum;
  for (const auto& r : rows) {
    const double denom = 1.0 + r.drift_budget;
    const double de = std::abs(r.energy - e0);
    std::vector<double> dp(r.momentum.size());
    for (std::size_t a = 0; a < dp.size(); ++a) dp[a] = r.momentum[a] - p0[a];
    rep.sup_energy_ratio = std::max(rep.sup_energy_ratio, de / denom);
    rep.sup_momentum_ratio = std::max(rep.sup_momentum_ratio, norm(dp) / denom);
    if (e0 != 0.0) {
      rep.max_relative_energy_change = std::max(rep.max_relative_energy_change, de / std::abs(e0));
    }
  }
  rep.bounded = std::isfinite(rep.sup_energy_ratio) && std::isfinite(rep.sup_momentum_ratio);
  return rep;
}

double drift_stability(double a, double b) {
  if (a == 0.0 && b == 0.0) return 1.0;
  if (a == 0.0 || b == 0.0) return std::numeric_limits<double>::infinity();
  return std::max(a / b, b / a);
}

bool BootstrapReport::all_b_positive() const {
  return std::all_of(flags.begin(), flags.end(), [](const auto& f) { return f.b_positive; });
}
bool BootstrapReport::all_below_alpha() const {
  return std::all_of(flags.begin(), flags.end(), [](const auto& f) { return f.below_alpha; });
}
bool BootstrapReport::all_monotone_3_2() const {
  return std::all_of(flags.begin(), flags.end(), [](const auto& f) { return f.monotone_3_2; });
}
bool BootstrapReport::all_monotone_5_4() const {
  return std::all_of(flags.begin(), flags.end(), [](const auto& f) { return f.monotone_5_4; });
}

BootstrapReport bootstrap_monitor(const std::vector<TrajectoryRow>& rows, double alpha) {
  BootstrapReport rep;
  rep.flags.resize(rows.size());
  // Running maximum of lambda over later valid rows.
  std::vector<double> later_max(rows.size(), 0.0);
  double run = 0.0;
  for (std::size_t i = rows.size(); i-- > 0;) {
    if (rows[i].valid) run = std::max(run, rows[i].lambda);
    later_max[i] = run;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.b <= 0.0 && rep.first_b_crossing < 0) rep.first_b_crossing = static_cast<int>(i);
    if (!r.valid) continue;
    BootstrapFlags& f = rep.flags[i];
    f.b_positive = r.b > 0.0;
    f.below_alpha = r.eps_l2 + r.b < alpha;
    f.below_half_alpha = r.eps_l2 + r.b < 0.5 * alpha;
    f.monotone_3_2 = later_max[i] <= 1.5 * r.lambda;
    f.monotone_5_4 = later_max[i] <= 1.25 * r.lambda;
    if (r.b > 0.0) {
      const double inv_gamma = std::exp(std::numbers::pi / r.b);
      f.lambda_bound = std::log(r.lambda) <= -std::pow(inv_gamma, 2.0 / 3.0);
      f.weighted_bound = r.eps_weighted <= std::pow(r.gamma_b(), 2.0 / 3.0);
    }
  }

  // Dyadic partition: t_k is the first valid time with lambda <= 2^{-k}.
  std::vector<std::pair<int, std::size_t>> firsts;
  int next_k = -1;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].valid || !(rows[i].lambda > 0.0)) continue;
    const int k = static_cast<int>(std::floor(-std::log2(rows[i].lambda)));
    if (next_k < 0) next_k = k + 1;
    while (k >= next_k) {
      firsts.emplace_back(next_k, i);
      ++next_k;
    }
  }
  for (std::size_t j = 0; j + 1 < firsts.size(); ++j) {
    DyadicBin bin;
    bin.k = firsts[j].first;
    const auto& r = rows[firsts[j].second];
    bin.t_k = r.t;
    bin.lambda_k = r.lambda;
    bin.length = rows[firsts[j + 1].second].t - r.t;
    bin.ratio = bin.k > 0 ? bin.length / (bin.k * r.lambda * r.lambda) : 0.0;
    rep.bins.push_back(bin);
  }
  std::vector<double> ratios;
  for (const auto& b : rep.bins) {
    if (b.ratio > 0.0) ratios.push_back(b.ratio);
  }
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    rep.fitted_constant = ratios[ratios.size() / 2];
    rep.ratio_spread = ratios.back() / ratios.front();
  }
  return rep;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) return 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

LambdaEReport lambda_e_monitor(const std::vector<TrajectoryRow>& rows) {
  LambdaEReport rep;
  std::vector<double> xe, ye, xp, yp;
  for (const auto& r : rows) {
    rep.lambda2_energy.push_back(r.lambda2_energy());
    rep.lambda_momentum.push_back(r.lambda_momentum());
    if (!r.valid || !(r.lambda > 0.0)) continue;
    const double inv = -std::log(r.lambda);
    if (r.lambda2_energy() > 0.0) {
      xe.push_back(inv);
      ye.push_back(std::log(r.lambda2_energy()));
    }
    if (r.lambda_momentum() > 0.0) {
      xp.push_back(inv);
      yp.push_back(std::log(r.lambda_momentum()));
    }
  }
  rep.energy_slope = fit_slope(xe, ye);
  rep.momentum_slope = fit_slope(xp, yp);
  rep.energy_decreasing = xe.size() >= 2 && rep.energy_slope < 0.0;
  rep.momentum_decreasing = xp.size() >= 2 && rep.momentum_slope < 0.0;
  return rep;
}

std::vector<VirialPoint> virial_proxy(const std::vector<TrajectoryRow>& rows) {
  std::vector<const TrajectoryRow*> v;
  for (const auto& r : rows) {
    if (r.valid) v.push_back(&r);
  }
  if (v.size() < 3) throw Error(Errc::insufficient_samples, "virial proxy needs three valid rows");
  std::vector<VirialPoint> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == v.size() ? i : i + 1;
    const double ds = v[hi]->s - v[lo]->s;
    const double b_s = ds != 0.0 ? (v[hi]->b - v[lo]->b) / ds : 0.0;
    VirialPoint& p = out[i];
    p.s = v[i]->s;
    p.q = b_s + 2.0 * v[i]->lambda * v[i]->lambda * v[i]->energy;
    const double g = v[i]->gamma_b();
    p.ratio = g > 0.0 ? p.q / g : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace snls
