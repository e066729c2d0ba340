#include "snls/rate_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "snls/error.hpp"

namespace snls {
namespace {

enum class Model { A, B, C };

struct Data {
  std::vector<double> t;
  std::vector<double> y;  // ln lambda^{-2}
  double t_a = 0.0;
  double t_b = 0.0;
};

struct Inner {
  bool ok = false;
  double lnC = 0.0;
  double p = 0.5;
  std::vector<double> r;  // residuals in y
};

// Closed-form inner solve at fixed T.
Inner inner_fit(const Data& d, Model m, double T) {
  Inner out;
  const std::size_t n = d.t.size();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = T - d.t[i];
    if (!(tau > 0.0)) return out;
    const double lt = std::log(tau);
    if (m == Model::B) {
      const double ll = std::log(std::abs(lt));
      if (!(ll > 0.0) || !(lt < 0.0)) return out;
      g[i] = std::log(ll) - lt;
    } else {
      g[i] = -lt;
    }
  }
  out.r.resize(n);
  if (m == Model::C) {
    // y = 2 lnC + 2p * g: ordinary least squares in (2 lnC, 2p).
    double mg = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mg += g[i];
      my += d.y[i];
    }
    mg /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sgy = 0.0, sgg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sgy += (g[i] - mg) * (d.y[i] - my);
      sgg += (g[i] - mg) * (g[i] - mg);
    }
    if (!(sgg > 0.0)) return out;
    const double slope = sgy / sgg;
    const double icpt = my - slope * mg;
    out.p = 0.5 * slope;
    out.lnC = 0.5 * icpt;
    for (std::size_t i = 0; i < n; ++i) out.r[i] = d.y[i] - icpt - slope * g[i];
  } else {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += d.y[i] - g[i];
    out.lnC = acc / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) out.r[i] = d.y[i] - out.lnC - g[i];
  }
  out.ok = true;
  return out;
}

double rms(const std::vector<double>& r) {
  double acc = 0.0;
  for (double v : r) acc += v * v;
  return std::sqrt(acc / static_cast<double>(r.size()));
}

ModelFit fit_model(const Data& d, Model m) {
  ModelFit fit;
  const double span = d.t_b - d.t_a;
  double lo = std::log(span * 1e-9);
  double hi = std::log(span * 1e3 + 1.0);
  if (m == Model::B) {
    const double cap = std::exp(-1.0) - span;
    if (!(cap > 0.0)) {
      fit.note = "window longer than 1/e: ln|ln(T-t)| undefined";
      return fit;
    }
    hi = std::min(hi, std::log(cap) - 1e-12);
  }
  const auto objective = [&](double theta) {
    const Inner in = inner_fit(d, m, d.t_b + std::exp(theta));
    return in.ok ? rms(in.r) : std::numeric_limits<double>::infinity();
  };

  const int scan = 400;
  int best = -1;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= scan; ++i) {
    const double th = lo + (hi - lo) * i / scan;
    const double v = objective(th);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best < 0) {
    fit.note = "no finite objective";
    return fit;
  }
  const double h = (hi - lo) / scan;
  double a = lo + h * std::max(best - 1, 0);
  double b = lo + h * std::min(best + 1, scan);

  // Golden-section refinement.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a);
  double e = a + gr * (b - a);
  double fc = objective(c);
  double fe = objective(e);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * (1.0 + std::abs(a)); ++it) {
    if (fc < fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - gr * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + gr * (b - a);
      fe = objective(e);
    }
  }
  double theta = fc < fe ? c : e;

  // Variable-projection Gauss-Newton polish on theta.
  Inner cur = inner_fit(d, m, d.t_b + std::exp(theta));
  double sse = 0.0;
  for (double v : cur.r) sse += v * v;
  for (int it = 0; it < 50 && cur.ok; ++it) {
    const double step = 1e-7 * (1.0 + std::abs(theta));
    const Inner plus = inner_fit(d, m, d.t_b + std::exp(theta + step));
    const Inner minus = inner_fit(d, m, d.t_b + std::exp(theta - step));
    if (!plus.ok || !minus.ok) break;
    double jr = 0.0, jj = 0.0;
    for (std::size_t i = 0; i < cur.r.size(); ++i) {
      const double j = (plus.r[i] - minus.r[i]) / (2.0 * step);
      jr += j * cur.r[i];
      jj += j * j;
    }
    if (!(jj > 0.0)) break;
    const double next = theta - jr / jj;
    const Inner trial = inner_fit(d, m, d.t_b + std::exp(next));
    if (!trial.ok) break;
    double sse_t = 0.0;
    for (double v : trial.r) sse_t += v * v;
    if (!(sse_t < sse)) break;
    theta = next;
    cur = trial;
    sse = sse_t;
  }
  if (!cur.ok) {
    fit.note = "inner solve failed at optimum";
    return fit;
  }
  fit.T = d.t_b + std::exp(theta);
  fit.C = std::exp(cur.lnC);
  fit.p = m == Model::C ? cur.p : 0.5;
  fit.residual = rms(cur.r);
  fit.ok = std::isfinite(fit.T) && std::isfinite(fit.C) && std::isfinite(fit.residual);
  if (theta <= lo + h || theta >= hi - h) fit.note = "optimum at search boundary";
  return fit;
}

}  // namespace

bool RateFit::loglog_not_worse() const {
  return loglog.ok && power_law.ok && loglog.residual <= power_law.residual;
}

RateFit fit_blowup_rate(const std::vector<RatePoint>& points, double lambda_hi, double lambda_lo,
                        int min_samples) {
  std::vector<RatePoint> w;
  for (const auto& p : points) {
    if (p.lambda <= lambda_hi && p.lambda >= lambda_lo && std::isfinite(p.t)) w.push_back(p);
  }
  std::sort(w.begin(), w.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  if (static_cast<int>(w.size()) < min_samples) {
    throw Error(Errc::insufficient_window, std::to_string(w.size()) + " samples in window, need " +
                                               std::to_string(min_samples));
  }
  Data d;
  for (const auto& p : w) {
    d.t.push_back(p.t);
    d.y.push_back(-2.0 * std::log(p.lambda));
  }
  d.t_a = d.t.front();
  d.t_b = d.t.back();
  if (!(d.t_b > d.t_a)) throw Error(Errc::insufficient_window, "window has zero duration");

  RateFit fit;
  fit.t_a = d.t_a;
  fit.t_b = d.t_b;
  fit.samples = static_cast<int>(w.size());
  fit.power_law = fit_model(d, Model::A);
  fit.loglog = fit_model(d, Model::B);
  fit.free = fit_model(d, Model::C);
  if (!fit.power_law.ok && !fit.loglog.ok && !fit.free.ok) {
    throw Error(Errc::fit_divergence, "no rate model converged");
  }
  return fit;
}

double model_a_lambda(double t, double T, double C) { return std::sqrt((T - t) / C); }

double model_b_lambda(double t, double T, double C) {
  const double tau = T - t;
  return std::sqrt(tau / (C * std::log(std::abs(std::log(tau)))));
}

double model_c_lambda(double t, double T, double C, double p) {
  return std::pow(T - t, p) / C;
}

}  // namespace snls
