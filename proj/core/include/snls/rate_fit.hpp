#pragma once

#include <string>
#include <vector>

namespace snls {

/// Fit of one rate model on the window. Residuals are RMS in log space.
struct ModelFit {
  bool ok = false;
  double T = 0.0;
  double C = 0.0;
  double p = 0.0;  // exponent of lambda^{-1}; 1/2 for models A and B
  double residual = 0.0;
  std::string note;
};

/// (A) lambda^{-2} = C/(T - t)
/// (B) lambda^{-2} = C ln|ln(T - t)| / (T - t), defined for T - t < 1/e
/// (C) lambda^{-1} = C (T - t)^{-p}
struct RateFit {
  ModelFit power_law;  // A
  ModelFit loglog;     // B
  ModelFit free;       // C
  double t_a = 0.0;
  double t_b = 0.0;
  int samples = 0;

  double residual_powerlaw() const { return power_law.residual; }
  double residual_loglog() const { return loglog.residual; }
  /// residual(B) <= residual(A), false when B is undefined on the window.
  bool loglog_not_worse() const;
};

struct RatePoint {
  double t = 0.0;
  double lambda = 0.0;
};

/// Fits all three models on the points with lambda in [lambda_lo, lambda_hi].
/// Throws Errc::insufficient_window with fewer than `min_samples` points and
/// Errc::fit_divergence when no model produces a finite optimum.
RateFit fit_blowup_rate(const std::vector<RatePoint>& points, double lambda_hi, double lambda_lo,
                        int min_samples = 20);

/// lambda(t) of each model, for generating synthetic series.
double model_a_lambda(double t, double T, double C);
double model_b_lambda(double t, double T, double C);
double model_c_lambda(double t, double T, double C, double p);

}  // namespace snls
