#pragma once

#include <string>
#include <vector>

#include "snls/config.hpp"
#include "snls/grid.hpp"
#include "snls/ground_state.hpp"

namespace snls {

/// Geometric parameters of u = lambda^{-d/2} (Q~_b + eps)((x - x_c)/lambda) e^{i gamma}.
struct ModulationParams {
  double lambda = 1.0;
  double b = 0.0;
  Point x_c{0.0, 0.0};
  double gamma = 0.0;
};

enum class ModulationStatus { ok, eps_too_large, newton_divergence, not_run };

std::string to_string(ModulationStatus s);

struct ModulationState {
  double lambda = 1.0;
  double b = 0.0;
  Point x_c{0.0, 0.0};
  double gamma = 0.0;
  /// Remainder in the physical frame:
  /// eps_x(x) = e^{-i gamma} u(x) - lambda^{-d/2} Q~_b((x - x_c)/lambda).
  /// The y-frame remainder is eps(y) = lambda^{d/2} eps_x(lambda y + x_c).
  ComplexField eps;
  std::vector<double> residuals;  // d+3 orthogonality pairings
  double s = 0.0;                 // rescaled time, filled in by the caller
  double eps_l2 = 0.0;
  double eps_weighted = 0.0;      // int |grad eps|^2 + |eps|^2 e^{-|y|} dy
  double jacobian_condition = 0.0;
  int iterations = 0;
  bool converged = false;
  bool valid = false;  // converged and ||eps||_{L^2} + b < alpha
  ModulationStatus status = ModulationStatus::not_run;

  ModulationParams params() const { return {lambda, b, x_c, gamma}; }
  double residual_max() const;
  /// eps resampled on a y-grid centered at the origin.
  ComplexField eps_on(const Grid& ygrid) const;
};

/// Test functions paired against eps, in order:
/// |y|^2 Q~_b, y_j Q~_b (j < d), i Lambda Q~_b, i Lambda^2 Q~_b.
/// Closed forms from Q, Q', Q''; `qb` receives Q~_b(y).
void modulation_test_functions(const RadialProfile& profile, double b, Point y, int dim,
                               cplx* out, cplx* qb = nullptr);

/// [Re(|y|^2 Q~_b, eps), Re(y_j Q~_b, eps), Re(i Lambda Q~_b, eps), Re(i Lambda^2 Q~_b, eps)]
/// with (f, g) = int f conj(g) dy, for eps on a y-grid centered at the origin.
std::vector<double> orthogonality_residuals(const ComplexField& eps, double b,
                                            const RadialProfile& profile);

/// Newton seed from the peak, the gradient-norm ratio and the local quadratic phase.
/// Throws Errc::flat_field when u has no peak.
ModulationParams initial_guess(const ComplexField& u, const GroundState& gs);

struct DecomposeOptions {
  double alpha = 0.2;
  double tol = 1e-10;  // relative to ||Q||^2
  int max_iter = 50;
  double fd_step = 1e-6;
  double window = 40.0;  // pairings summed over |y| < window
};

/// Solves the orthogonality conditions for (lambda, b, x_c, gamma) by Newton
/// with a central-difference Jacobian. Never throws on divergence: the status
/// records newton_divergence or eps_too_large.
ModulationState decompose(const ComplexField& u, const ModulationParams& guess,
                          const GroundState& gs, const DecomposeOptions& opts = {});

/// e^{i gamma} (lambda^{-d/2} Q~_b((x - x_c)/lambda) + eps_x).
ComplexField reconstruct(const ModulationState& state, const GroundState& gs);

/// lambda^{-d/2} Q~_b((x - x_c)/lambda) e^{i gamma} on `grid` (periodic wrap).
ComplexField ansatz_field(const ModulationParams& p, const RadialProfile& profile,
                          const Grid& grid);

/// Orthogonality residuals of u at fixed parameters, evaluated in the physical frame.
std::vector<double> residuals_at(const ComplexField& u, const ModulationParams& p,
                                 const RadialProfile& profile, double window = 40.0);

/// Condition number of the normalized Newton Jacobian at p.
double jacobian_condition(const ComplexField& u, const ModulationParams& p,
                          const RadialProfile& profile, double fd_step = 1e-6);

struct ConstraintReport {
  bool b_positive = false;
  bool smallness = false;  // ||eps_0|| + b_0 < alpha
  double eps_l2 = 0.0;
  bool lambda_bound = false;  // lambda_0 <= exp(-(1/Gamma_b)^{4/5})
  double log_lambda0 = 0.0;
  double log_lambda_bound = 0.0;
  bool weighted_bound = false;  // weighted eps_0 norm < Gamma_b^{4/5}
  double eps_weighted = 0.0;
  double log_weighted_bound = 0.0;
  bool energy_bound = false;  // |E(u_0)| <= 1000
  double energy = 0.0;
  bool momentum_bound = false;  // |P(u_0)| <= 1000
  double momentum = 0.0;

  /// True when every constraint holds; expected false at desk scale.
  bool all() const;
};

struct InitialData {
  ComplexField u0;
  ComplexField eps0;  // physical frame, as in ModulationState::eps
  ConstraintReport report;
};

/// u_0 = lambda_0^{-d/2} (Q~_{b_0} + eps_0)((x - x_0)/lambda_0) e^{i gamma_0}.
/// eps_0 is the chosen recipe projected onto the orthogonality constraints.
/// Throws Errc::invalid_spec unless lambda_0 > 0 and b_0 > 0.
InitialData build_initial_data(const InitialConfig& spec, const GroundState& gs,
                               const Grid& grid, double alpha = 0.2);

struct SeriesPoint {
  double t = 0.0;
  double s = 0.0;
  double lambda = 0.0;
  double b = 0.0;
  double b_s = 0.0;
  double minus_lambda_s_over_lambda = 0.0;  // -lambda_s / lambda
};

struct ModulationSample {
  double t = 0.0;
  double s = 0.0;
  double lambda = 0.0;
  double b = 0.0;
  bool valid = false;
};

/// Centered differences in s over the valid samples (one-sided at the ends).
/// Throws Errc::insufficient_samples with fewer than three valid samples.
std::vector<SeriesPoint> series(const std::vector<ModulationSample>& samples);

}  // namespace snls
