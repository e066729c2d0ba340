#pragma once

#include <cstdint>
#include <vector>

#include "snls/ground_state.hpp"
#include "snls/rate_fit.hpp"

namespace snls {

/// Deterministic soliton: X(t) = e^{it} Q on a 1d grid.
struct SolitonOracleOptions {
  double half_width = 20.0;
  int n = 512;
  double t_end = 1.0;
  double dt = 1e-4;
  std::vector<double> ladder{0.01, 0.005, 0.0025};  // self-convergence step sizes
};

struct SolitonOracleResult {
  double error = 0.0;  // ||X(t_end) - e^{i t_end} Q||_{L^2} at opts.dt
  std::vector<double> ladder_differences;  // ||X_dt - X_{dt/2}|| along the ladder
  double order = 0.0;                      // log2 of the last difference ratio
  double mass_drift = 0.0;
};

SolitonOracleResult soliton_oracle(const SolitonOracleOptions& opts = {});

/// Pseudo-conformal solution S(t) evolved from t_start with adaptive steps and regrids.
struct PconfOracleOptions {
  double half_width = 20.0;
  int n = 512;
  double t_start = -1.0;
  double t_end = -0.25;
  double dt0 = 1e-3;
  double lambda_hi = 0.45;
  double lambda_lo = 0.25;
};

struct PconfOracleResult {
  double relative_error = 0.0;  // ||u(t_end) - S(t_end)|| / ||S(t_end)||
  int regrids = 0;
  int final_n = 0;
  double t_reached = 0.0;
  RateFit fit;
  double mass_drift = 0.0;
};

PconfOracleResult pconf_oracle(const PconfOracleOptions& opts = {});

/// Noise substep alone: X(t) = X_0 e^{i W(t)}.
struct NoiseIdentityOptions {
  int dim = 1;
  double half_width = 20.0;
  int n = 512;
  int steps = 1000;
  int dt_level = 4;  // dt = base_dt / 2^dt_level
  double base_dt = 1.0 / 64.0;
  std::uint64_t seed = 7;
};

struct NoiseIdentityResult {
  double sup_error = 0.0;
  double t_end = 0.0;
  int steps = 0;
};

NoiseIdentityResult noise_identity_oracle(const NoiseIdentityOptions& opts = {});

}  // namespace snls
