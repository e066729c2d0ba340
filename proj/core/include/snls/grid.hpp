#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace snls {

using cplx = std::complex<double>;
using Point = std::array<double, 2>;

/// Uniform periodic grid on the box center + [-L, L)^d.
///
/// Points along each axis are x_i = center - L + i*dx, i = 0..N-1, with
/// dx = 2L/N. Fields are stored row-major; in 2d axis 0 is the slow index.
/// Wavenumbers follow the FFT ordering with k = pi*n/L, n in [-N/2, N/2).
struct Grid {
  int dim = 1;
  double half_width = 20.0;
  int n = 256;
  Point center{0.0, 0.0};

  double dx() const { return 2.0 * half_width / n; }
  double cell_volume() const { return dim == 1 ? dx() : dx() * dx(); }
  std::size_t size() const {
    return dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
  }
  double coord(int i, int axis = 0) const { return center[axis] - half_width + i * dx(); }
  /// Signed mode number of FFT slot `idx` (Nyquist maps to -N/2).
  int mode(int idx) const { return idx < n / 2 ? idx : idx - n; }
  double wavenumber(int idx) const;
  /// Grid point position for flat index `idx`.
  Point position(std::size_t idx) const;

  bool operator==(const Grid&) const = default;
};

Grid make_grid(int dim, double half_width, int n, Point center = {0.0, 0.0});

struct ComplexField {
  Grid grid;
  std::vector<cplx> values;

  ComplexField() = default;
  explicit ComplexField(const Grid& g) : grid(g), values(g.size(), cplx{}) {}
  ComplexField(const Grid& g, std::vector<cplx> v);

  std::size_t size() const { return values.size(); }
  cplx& operator[](std::size_t i) { return values[i]; }
  const cplx& operator[](std::size_t i) const { return values[i]; }

  bool operator==(const ComplexField&) const = default;
};

struct RealField {
  Grid grid;
  std::vector<double> values;

  RealField() = default;
  explicit RealField(const Grid& g) : grid(g), values(g.size(), 0.0) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  const double& operator[](std::size_t i) const { return values[i]; }
};

/// Samples `fn(Point)` at every grid point.
template <class Fn>
ComplexField sample(const Grid& g, Fn&& fn) {
  ComplexField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = fn(g.position(i));
  return f;
}

bool all_finite(std::span<const cplx> values);

/// Riemann sum of |f|^2 dx^d.
double l2_norm_sq(const ComplexField& f);
double l2_norm(const ComplexField& f);
/// Riemann-sum pairing Re sum f * conj(g) dx^d.
double real_inner(const ComplexField& f, const ComplexField& g);
/// Complex pairing sum conj(f) * g dx^d.
cplx inner(const ComplexField& f, const ComplexField& g);

/// One field per axis: d_j f computed as i*k_j in frequency space.
std::vector<ComplexField> spectral_gradient(const ComplexField& f);
/// Sum_j ||d_j f||^2 evaluated in frequency space via Parseval.
double gradient_norm_sq(const ComplexField& f);
/// Spectral Laplacian, -|k|^2 in frequency space.
ComplexField spectral_laplacian(const ComplexField& f);
double h1_norm(const ComplexField& f);

/// int |grad eps|^2 + |eps|^2 e^{-|y|} dy for eps on a y-grid centered at 0.
double weighted_eps_norm(const ComplexField& eps);
/// Same quantity for eps given in the physical frame, eps(y) = lambda^{d/2} eps_x(lambda y + x_c).
double weighted_eps_norm_physical(const ComplexField& eps_x, double lambda, Point x_c);

/// Periodic displacement x - c wrapped into [-L, L).
double wrap_displacement(double x, double c, double half_width);

/// Trigonometric interpolation of f onto `target` (its own L, N and center).
///
/// Refinement on the same box is exact. When the box moves or shrinks, f must be
/// negligible at its own boundary (relative amplitude below `boundary_tol`),
/// otherwise Errc::field_not_localized is thrown.
ComplexField spectral_interpolate(const ComplexField& f, const Grid& target,
                                  double boundary_tol = 1e-12);
ComplexField spectral_interpolate(const ComplexField& f, const Grid& target, Point center,
                                  double boundary_tol = 1e-12);

/// Evaluates the trigonometric interpolant of f on the uniform lattice
/// origin + h * (m0, m1), m_a in [0, count). Handles arbitrary spacing.
ComplexField evaluate_on_lattice(const ComplexField& f, const Grid& lattice_grid);

}  // namespace snls
