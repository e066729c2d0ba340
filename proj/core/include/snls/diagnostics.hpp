#pragma once

#include <cmath>
#include <vector>

#include "snls/grid.hpp"

namespace snls {

/// E(u) = 1/2 int |grad u|^2 - 1/(2 + 4/d) int |u|^{2 + 4/d}.
double energy(const ComplexField& u);
/// P(u) = Im int conj(u) grad u, one entry per axis.
std::vector<double> momentum(const ComplexField& u);
double norm(const std::vector<double>& v);

/// One sampled row of a path: modulation parameters and monitored quantities.
struct TrajectoryRow {
  double t = 0.0;
  double s = 0.0;
  double lambda = 0.0;
  double b = 0.0;
  Point x_c{0.0, 0.0};
  double gamma = 0.0;
  double eps_l2 = 0.0;
  double eps_weighted = 0.0;
  double residual_max = 0.0;
  bool valid = false;
  bool converged = false;

  double mass = 0.0;
  double energy = 0.0;
  std::vector<double> momentum;
  double h1 = 0.0;
  double lambda_est = 0.0;
  double drift_budget = 0.0;  // int_0^t ||u||_{H^1}^2 (trapezoid on samples)
  int grid_n = 0;

  double gamma_b() const;  // e^{-pi/b}, 0 for b <= 0
  double lambda2_energy() const { return lambda * lambda * std::abs(energy); }
  double lambda_momentum() const { return lambda * norm(momentum); }
};

struct DriftReport {
  double sup_energy_ratio = 0.0;    // sup |E(t) - E(0)| / (1 + budget(t))
  double sup_momentum_ratio = 0.0;  // sup |P(t) - P(0)| / (1 + budget(t))
  double max_relative_energy_change = 0.0;  // sup |E(t) - E(0)| / |E(0)|
  bool bounded = false;
};

/// Needs at least two rows.
DriftReport check_energy_drift(const std::vector<TrajectoryRow>& rows);

/// max(a/b, b/a) of the two sup ratios; used for dt versus dt/2 comparisons.
double drift_stability(double a, double b);

struct BootstrapFlags {
  bool b_positive = false;
  bool below_alpha = false;       // ||eps|| + b < alpha
  bool below_half_alpha = false;  // ||eps|| + b < alpha / 2
  bool monotone_3_2 = false;      // lambda(t') <= 3/2 lambda(t) for all later t'
  bool monotone_5_4 = false;
  bool lambda_bound = false;      // lambda <= exp(-(1/Gamma_b)^{2/3}); recorded only
  bool weighted_bound = false;    // weighted eps norm <= Gamma_b^{2/3}; recorded only
};

struct DyadicBin {
  int k = 0;
  double t_k = 0.0;
  double lambda_k = 0.0;
  double length = 0.0;  // t_{k+1} - t_k
  double ratio = 0.0;   // length / (k lambda_k^2)
};

struct BootstrapReport {
  std::vector<BootstrapFlags> flags;  // one per row
  int first_b_crossing = -1;          // first row with b <= 0, or -1
  std::vector<DyadicBin> bins;
  double fitted_constant = 0.0;  // median ratio over the bins
  double ratio_spread = 0.0;     // max / min ratio over the bins

  bool all_b_positive() const;
  bool all_below_alpha() const;
  bool all_monotone_3_2() const;
  bool all_monotone_5_4() const;
};

/// Evaluates the bootstrap inequalities on the valid rows (invalid rows get all-false flags).
BootstrapReport bootstrap_monitor(const std::vector<TrajectoryRow>& rows, double alpha);

struct LambdaEReport {
  std::vector<double> lambda2_energy;
  std::vector<double> lambda_momentum;
  double energy_slope = 0.0;    // d log(lambda^2 |E|) / d log(1/lambda)
  double momentum_slope = 0.0;  // d log(lambda |P|) / d log(1/lambda)
  bool energy_decreasing = false;
  bool momentum_decreasing = false;
};

LambdaEReport lambda_e_monitor(const std::vector<TrajectoryRow>& rows);

struct VirialPoint {
  double s = 0.0;
  double q = 0.0;      // b_s + 2 lambda^2 E
  double ratio = 0.0;  // q / Gamma_b
};

/// Uses the valid rows; b_s by centered differences in s. Needs three valid rows.
std::vector<VirialPoint> virial_proxy(const std::vector<TrajectoryRow>& rows);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace snls
