#pragma once

#include <filesystem>
#include <limits>
#include <memory>
#include <vector>

#include "snls/grid.hpp"

namespace snls {

/// Radial ground state of Delta Q - Q + Q^{1+4/d} = 0 as a function of r = |y|.
///
/// In 1d this is the closed form 3^{1/4} sech^{1/2}(2r). In 2d the profile is
/// tabulated from the shooting solve and interpolated with cubic Hermite
/// splines on (Q, Q') and (Q', Q''); beyond the matching radius it continues
/// as A*K_0(r).
class RadialProfile {
 public:
  RadialProfile() = default;
  static RadialProfile closed_form_1d();
  static RadialProfile tabulated_2d(double step, std::vector<double> q, std::vector<double> dq,
                                    double tail_amplitude);

  int dim() const { return dim_; }
  double value(double r) const;
  double d1(double r) const;
  double d2(double r) const;
  double central_value() const { return value(0.0); }
  /// Radius where the table hands over to the K_0 tail (2d only).
  double matching_radius() const;

 private:
  int dim_ = 1;
  double step_ = 0.0;
  std::vector<double> q_;
  std::vector<double> dq_;
  double tail_amplitude_ = 0.0;
};

struct GroundState {
  Grid grid;
  RealField q;
  double mass = 0.0;      // ||Q||_{L^2}^2 on the grid
  double gradnorm = 0.0;  // ||grad Q||_{L^2}^2 on the grid
  double central_value = 0.0;
  std::shared_ptr<const RadialProfile> profile;

  ComplexField as_complex() const;
};

GroundState ground_state_1d(const Grid& grid);

struct ShootingResult {
  RadialProfile profile;
  double central_value = 0.0;
  double bracket_width = 0.0;
  double mass = 0.0;  // 2 pi int Q^2 r dr
  double matching_radius = 0.0;
};

/// Radial shooting on Q'' + Q'/r - Q + Q^3 = 0, Q'(0) = 0, bisecting on Q(0)
/// between undershoot (Q' turns positive) and overshoot (Q crosses zero).
ShootingResult shoot_townes(double r_max = 20.0, int n_r = 20000);

/// Independent check: Petviashvili renormalized iteration on a 2d periodic grid.
/// Returns the converged profile on `grid`.
RealField townes_petviashvili(const Grid& grid, double tol = 1e-13, int max_iter = 2000);

/// 2d ground state lifted to `grid` by radial interpolation. Aborts with
/// Errc::solver_disagreement if the shooting and renormalized-iteration masses
/// differ by more than 1e-4.
GroundState ground_state_2d(const Grid& grid, double r_max = 20.0, int n_r = 20000);

/// Dispatches on grid.dim.
GroundState ground_state(const Grid& grid);

/// sup |Delta Q - Q + Q^{1+4/d}| over grid points with |x| < radius, the
/// Laplacian taken spectrally. Limited by grid resolution and by the periodic
/// wrap of the tail near the box edge.
double elliptic_residual(const GroundState& gs,
                         double radius = std::numeric_limits<double>::infinity());

/// Same residual at the grid points, with Delta Q = Q'' + (d-1) Q'/r taken from
/// the radial profile instead of the grid.
double profile_residual(const GroundState& gs);

/// Q~_b(y) = Q(|y|) exp(-i b |y|^2 / 4) on `grid`; requires |b| < 0.5.
ComplexField qb_profile(double b, const RadialProfile& profile, const Grid& grid);
ComplexField qb_profile(double b, const GroundState& gs);

/// Lambda f = (d/2) f + y.grad f (spectral gradient), applied `power` times.
ComplexField apply_lambda(const ComplexField& f, int power = 1);

/// Representative e^{-pi/b} of Gamma_b; b must be positive.
double gamma_b(double b);
/// log(Gamma_b) = -pi/b, for thresholds far below double range.
double log_gamma_b(double b);

/// CSV with columns r,Q (r from 0 to r_max).
void write_profile_csv(const RadialProfile& profile, double r_max, int samples,
                       const std::filesystem::path& path);

}  // namespace snls
