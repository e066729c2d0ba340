#include "snls/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "snls/error.hpp"
#include "snls/fft.hpp"

namespace snls {

double Grid::wavenumber(int idx) const { return std::numbers::pi * mode(idx) / half_width; }

Point Grid::position(std::size_t idx) const {
  if (dim == 1) return {coord(static_cast<int>(idx)), 0.0};
  const auto nn = static_cast<std::size_t>(n);
  return {coord(static_cast<int>(idx / nn), 0), coord(static_cast<int>(idx % nn), 1)};
}

Grid make_grid(int dim, double half_width, int n, Point center) {
  if (dim != 1 && dim != 2) throw Error(Errc::invalid_dimension, "d must be 1 or 2");
  if (n < 16 || !std::has_single_bit(static_cast<unsigned>(n))) {
    throw Error(Errc::non_power_of_two, "N must be a power of two >= 16, got " + std::to_string(n));
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw Error(Errc::invalid_argument, "L must be positive");
  }
  return Grid{dim, half_width, n, center};
}

ComplexField::ComplexField(const Grid& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
  if (values.size() != g.size()) throw Error(Errc::invalid_argument, "field size mismatch");
}

bool all_finite(std::span<const cplx> values) {
  return std::all_of(values.begin(), values.end(),
                     [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

double l2_norm_sq(const ComplexField& f) {
  double acc = 0.0;
  for (const auto& z : f.values) acc += std::norm(z);
  return acc * f.grid.cell_volume();
}

double l2_norm(const ComplexField& f) { return std::sqrt(l2_norm_sq(f)); }

double real_inner(const ComplexField& f, const ComplexField& g) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    acc += f[i].real() * g[i].real() + f[i].imag() * g[i].imag();
  }
  return acc * f.grid.cell_volume();
}

cplx inner(const ComplexField& f, const ComplexField& g) {
  cplx acc{};
  for (std::size_t i = 0; i < f.size(); ++i) acc += std::conj(f[i]) * g[i];
  return acc * f.grid.cell_volume();
}

namespace {

// Wavenumber used for odd-order derivatives: the Nyquist mode is dropped so
// that derivatives of real fields stay real.
double derivative_wavenumber(const Grid& g, int idx) {
  return idx == g.n / 2 ? 0.0 : g.wavenumber(idx);
}

}  // namespace

std::vector<ComplexField> spectral_gradient(const ComplexField& f) {
  const Grid& g = f.grid;
  ComplexField spec = f;
  fft::forward(spec);
  const double norm = 1.0 / static_cast<double>(g.size());
  std::vector<ComplexField> out;
  out.reserve(g.dim);
  for (int axis = 0; axis < g.dim; ++axis) {
    ComplexField d(g);
    const auto nn = static_cast<std::size_t>(g.n);
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const int idx = static_cast<int>(g.dim == 1 ? i : (axis == 0 ? i / nn : i % nn));
      d[i] = cplx(0.0, derivative_wavenumber(g, idx) * norm) * spec[i];
    }
    fft::inverse(d);
    out.push_back(std::move(d));
  }
  return out;
}

double gradient_norm_sq(const ComplexField& f) {
  const Grid& g = f.grid;
  ComplexField spec = f;
  fft::forward(spec);
  const auto nn = static_cast<std::size_t>(g.n);
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    double k2 = 0.0;
    if (g.dim == 1) {
      k2 = std::pow(derivative_wavenumber(g, static_cast<int>(i)), 2);
    } else {
      k2 = std::pow(derivative_wavenumber(g, static_cast<int>(i / nn)), 2) +
           std::pow(derivative_wavenumber(g, static_cast<int>(i % nn)), 2);
    }
    acc += k2 * std::norm(spec[i]);
  }
  // sum |f|^2 dx^d = dx^d / N^d * sum |F|^2
  return acc * g.cell_volume() / static_cast<double>(g.size());
}

ComplexField spectral_laplacian(const ComplexField& f) {
  const Grid& g = f.grid;
  ComplexField spec = f;
  fft::forward(spec);
  const auto nn = static_cast<std::size_t>(g.n);
  const double norm = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    double k2 = 0.0;
    if (g.dim == 1) {
      k2 = std::pow(g.wavenumber(static_cast<int>(i)), 2);
    } else {
      k2 = std::pow(g.wavenumber(static_cast<int>(i / nn)), 2) +
           std::pow(g.wavenumber(static_cast<int>(i % nn)), 2);
    }
    spec[i] *= -k2 * norm;
  }
  fft::inverse(spec);
  return spec;
}

double h1_norm(const ComplexField& f) { return std::sqrt(l2_norm_sq(f) + gradient_norm_sq(f)); }

double weighted_eps_norm(const ComplexField& eps) {
  const Grid& g = eps.grid;
  double acc = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const Point p = g.position(i);
    const double r = g.dim == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
    acc += std::norm(eps[i]) * std::exp(-r);
  }
  return gradient_norm_sq(eps) + acc * g.cell_volume();
}

double wrap_displacement(double x, double c, double half_width) {
  const double period = 2.0 * half_width;
  double d = std::fmod(x - c + half_width, period);
  if (d < 0.0) d += period;
  return d - half_width;
}

double weighted_eps_norm_physical(const ComplexField& eps_x, double lambda, Point x_c) {
  const Grid& g = eps_x.grid;
  double acc = 0.0;
  for (std::size_t i = 0; i < eps_x.size(); ++i) {
    const Point p = g.position(i);
    double r = std::abs(wrap_displacement(p[0], x_c[0], g.half_width));
    if (g.dim == 2) r = std::hypot(r, wrap_displacement(p[1], x_c[1], g.half_width));
    acc += std::norm(eps_x[i]) * std::exp(-r / lambda);
  }
  return lambda * lambda * gradient_norm_sq(eps_x) + acc * g.cell_volume();
}

namespace {

std::size_t next_pow2(std::size_t v) { return std::bit_ceil(v); }

// Evaluates f(x) = (1/N) sum_n F_n e^{i k_n (x - x_left)} (Nyquist split
// symmetrically) at x = x0 + m*h for m = 0..count-1, by the chirp-z
// (Bluestein) identity nm = (n^2 + m^2 - (m-n)^2) / 2.
std::vector<cplx> chirp_evaluate(std::span<const cplx> coeffs, double half_width, double x_left,
                                 double x0, double h, int count) {
  const int n = static_cast<int>(coeffs.size());
  const int half = n / 2;
  const double kscale = std::numbers::pi / half_width;
  const double theta = kscale * h;
  const double shift = x0 - x_left;

  auto chirp = [theta](double q) {
    const double angle = 0.5 * theta * q * q;
    return cplx(std::cos(angle), std::sin(angle));
  };

  const std::size_t len = next_pow2(static_cast<std::size_t>(2 * n + count));
  std::vector<cplx> a(len), c(len);
  for (int j = 0; j <= n; ++j) {
    const int mode = j - half;
    const int slot = ((mode % n) + n) % n;
    cplx coef = coeffs[slot];
    if (mode == -half || mode == half) coef *= 0.5;
    const double phase = kscale * mode * shift;
    a[j] = coef * cplx(std::cos(phase), std::sin(phase)) * chirp(mode) / static_cast<double>(n);
  }
  for (int t = 0; t < count + n; ++t) c[t] = std::conj(chirp(t - half));

  std::vector<cplx> fa(len), fc(len);
  fft::forward_1d(a, fa);
  fft::forward_1d(c, fc);
  for (std::size_t i = 0; i < len; ++i) fa[i] *= fc[i] / static_cast<double>(len);
  fft::inverse_1d(fa, a);

  std::vector<cplx> out(count);
  for (int m = 0; m < count; ++m) out[m] = chirp(m) * a[m + n];
  return out;
}

// Exact refinement on the same box: phase-shift and zero-pad the spectrum.
std::vector<cplx> pad_evaluate(std::span<const cplx> coeffs, double half_width, double shift,
                               int target_n) {
  const int n = static_cast<int>(coeffs.size());
  const int half = n / 2;
  const double kscale = std::numbers::pi / half_width;
  std::vector<cplx> g(target_n);
  const double scale = static_cast<double>(target_n) / n;
  for (int slot = 0; slot < n; ++slot) {
    const int mode = slot < half ? slot : slot - n;
    if (mode == -half) {
      if (target_n == n) {
        g[slot] = coeffs[slot] * std::cos(kscale * half * shift) * scale;
      } else {
        const cplx c = 0.5 * coeffs[slot] * scale;
        const double ph = kscale * half * shift;
        g[half] += c * cplx(std::cos(ph), std::sin(ph));
        g[target_n - half] += c * cplx(std::cos(ph), -std::sin(ph));
      }
      continue;
    }
    const double ph = kscale * mode * shift;
    g[(mode + target_n) % target_n] = coeffs[slot] * cplx(std::cos(ph), std::sin(ph)) * scale;
  }
  std::vector<cplx> out(target_n);
  fft::inverse_1d(g, out);
  for (auto& z : out) z /= static_cast<double>(target_n);
  return out;
}

std::vector<cplx> evaluate_axis(std::span<const cplx> coeffs, const Grid& src, int axis,
                                const Grid& dst) {
  const double x_left = src.center[axis] - src.half_width;
  const double x0 = dst.center[axis] - dst.half_width;
  const bool same_box = std::abs(src.half_width - dst.half_width) <= 1e-15 * src.half_width;
  if (same_box && dst.n % src.n == 0) {
    return pad_evaluate(coeffs, src.half_width, x0 - x_left, dst.n);
  }
  return chirp_evaluate(coeffs, src.half_width, x_left, x0, dst.dx(), dst.n);
}

double boundary_amplitude(const ComplexField& f) {
  const Grid& g = f.grid;
  double peak = 0.0;
  for (const auto& z : f.values) peak = std::max(peak, std::abs(z));
  if (peak == 0.0) return 0.0;
  double edge = 0.0;
  if (g.dim == 1) {
    edge = std::max(std::abs(f[0]), std::abs(f[g.n - 1]));
  } else {
    const auto nn = static_cast<std::size_t>(g.n);
    for (std::size_t i = 0; i < nn; ++i) {
      edge = std::max({edge, std::abs(f[i]), std::abs(f[(nn - 1) * nn + i]), std::abs(f[i * nn]),
                       std::abs(f[i * nn + nn - 1])});
    }
  }
  return edge / peak;
}

}  // namespace

ComplexField evaluate_on_lattice(const ComplexField& f, const Grid& target) {
  const Grid& src = f.grid;
  if (target.dim != src.dim) throw Error(Errc::invalid_dimension, "dimension mismatch");
  ComplexField spec = f;
  fft::forward(spec);
  if (src.dim == 1) return ComplexField(target, evaluate_axis(spec.values, src, 0, target));

  // 2d: evaluate along the fast axis for every slow-axis mode, then along the slow axis.
  const auto sn = static_cast<std::size_t>(src.n);
  const auto tn = static_cast<std::size_t>(target.n);
  std::vector<cplx> partial(sn * tn);
  std::vector<cplx> row(sn);
  for (std::size_t r = 0; r < sn; ++r) {
    std::copy_n(spec.values.begin() + static_cast<std::ptrdiff_t>(r * sn), sn, row.begin());
    auto vals = evaluate_axis(row, src, 1, target);
    std::copy(vals.begin(), vals.end(), partial.begin() + static_cast<std::ptrdiff_t>(r * tn));
  }
  ComplexField out(target);
  std::vector<cplx> col(sn);
  for (std::size_t c = 0; c < tn; ++c) {
    for (std::size_t r = 0; r < sn; ++r) col[r] = partial[r * tn + c];
    auto vals = evaluate_axis(col, src, 0, target);
    for (std::size_t r = 0; r < tn; ++r) out[r * tn + c] = vals[r];
  }
  return out;
}

ComplexField spectral_interpolate(const ComplexField& f, const Grid& target, double boundary_tol) {
  const Grid& src = f.grid;
  if (target.dim != src.dim) throw Error(Errc::invalid_dimension, "dimension mismatch");
  if (target.n < src.n) throw Error(Errc::invalid_argument, "target grid must not be coarser");
  const bool same_box = std::abs(src.half_width - target.half_width) <= 1e-15 * src.half_width &&
                        src.center == target.center;
  if (!same_box) {
    for (int a = 0; a < src.dim; ++a) {
      if (std::abs(target.center[a] - src.center[a]) > src.half_width) {
        throw Error(Errc::invalid_argument, "center outside the source box");
      }
    }
    const double edge = boundary_amplitude(f);
    if (edge > boundary_tol) {
      throw Error(Errc::field_not_localized,
                  "boundary amplitude " + std::to_string(edge) + " exceeds tolerance");
    }
  }
  return evaluate_on_lattice(f, target);
}

ComplexField spectral_interpolate(const ComplexField& f, const Grid& target, Point center,
                                  double boundary_tol) {
  Grid g = target;
  g.center = center;
  return spectral_interpolate(f, g, boundary_tol);
}

}  // namespace snls
