#include "snls/evolve.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include "snls/error.hpp"
#include "snls/fft.hpp"

namespace snls {
namespace {

double nonlinear_power(int dim) { return dim == 1 ? 2.0 : 1.0; }  // |X|^{4/d} = (|X|^2)^{2/d}

std::vector<double> kinetic_symbol(const Grid& g) {
  std::vector<double> s(g.size());
  const auto n = static_cast<std::size_t>(g.n);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (g.dim == 1) {
      const double k = g.wavenumber(static_cast<int>(i));
      s[i] = k * k;
    } else {
      const double kx = g.wavenumber(static_cast<int>(i / n));
      const double ky = g.wavenumber(static_cast<int>(i % n));
      s[i] = kx * kx + ky * ky;
    }
  }
  return s;
}

void apply_kinetic(ComplexField& X, const std::vector<double>& symbol, double dt) {
  fft::forward(X);
  for (std::size_t i = 0; i < X.size(); ++i) X[i] *= std::polar(1.0, -symbol[i] * dt);
  fft::inverse(X);
  const double scale = 1.0 / static_cast<double>(X.size());
  for (auto& v : X.values) v *= scale;
}

}  // namespace

ComplexField step_kinetic(ComplexField X, double dt) {
  if (dt == 0.0) return X;
  apply_kinetic(X, kinetic_symbol(X.grid), dt);
  return X;
}

ComplexField step_nonlinear(ComplexField X, double dt) {
  const double p = nonlinear_power(X.grid.dim);
  for (auto& v : X.values) v *= std::polar(1.0, std::pow(std::norm(v), p) * dt);
  return X;
}

ComplexField step_noise(ComplexField X, const RealField& dW) {
  for (std::size_t i = 0; i < X.size(); ++i) X[i] *= std::polar(1.0, dW[i]);
  return X;
}

ComplexField strang_step(ComplexField X, double dt) {
  const auto symbol = kinetic_symbol(X.grid);
  apply_kinetic(X, symbol, 0.5 * dt);
  X = step_nonlinear(std::move(X), dt);
  apply_kinetic(X, symbol, 0.5 * dt);
  return X;
}

Stepper::Stepper(const NoiseRealization& noise, StepFlags flags) : noise_(&noise), flags_(flags) {}

void Stepper::ensure_grid(const Grid& g) {
  if (!symbol_.empty() && phi_.grid == g) return;
  phi_ = PhiOnGrid(noise_->phi(), g);
  symbol_ = kinetic_symbol(g);
  w_tick_ = -1;
}

void Stepper::load_w(Tick t, std::vector<double>& w) {
  w.resize(phi_.grid.size());
  phi_.combine(noise_->brownian_all(t), w);
}

void Stepper::kinetic(ComplexField& X, double dt, double* grad_sq) {
  if (!flags_.kinetic) {
    if (grad_sq) *grad_sq = gradient_norm_sq(X);
    return;
  }
  fft::forward(X);
  if (grad_sq) {
    // Parseval, Nyquist excluded as in gradient_norm_sq.
    const Grid& g = X.grid;
    const auto n = static_cast<std::size_t>(g.n);
    double acc = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      const bool nyq = g.dim == 1 ? i == n / 2 : (i / n == n / 2 || i % n == n / 2);
      if (!nyq) acc += symbol_[i] * std::norm(X[i]);
    }
    const double total = static_cast<double>(X.size());
    *grad_sq = acc * g.cell_volume() / total;
  }
  for (std::size_t i = 0; i < X.size(); ++i) X[i] *= std::polar(1.0, -symbol_[i] * dt);
  fft::inverse(X);
  const double scale = 1.0 / static_cast<double>(X.size());
  for (auto& v : X.values) v *= scale;
}

void Stepper::phase(ComplexField& X, Tick from, Tick to) {
  const bool use_noise = flags_.noise && noise_->count() > 0;
  if (use_noise) {
    if (w_tick_ != from) {
      load_w(from, w_);
      w_tick_ = from;
    }
    load_w(to, w_next_);
  }
  const double dt = noise_->time_of(to - from);
  const double p = nonlinear_power(X.grid.dim);
  for (std::size_t i = 0; i < X.size(); ++i) {
    double theta = 0.0;
    if (flags_.nonlinear) theta += std::pow(std::norm(X[i]), p) * dt;
    if (use_noise) theta += w_next_[i] - w_[i];
    X[i] *= std::polar(1.0, theta);
  }
  if (use_noise) {
    std::swap(w_, w_next_);
    w_tick_ = to;
  }
}

void Stepper::step(EvolveState& state) { advance(state, 1); }

double Stepper::advance(EvolveState& state, int count) {
  if (state.dt <= 0) throw Error(Errc::invalid_argument, "step size must be positive");
  ensure_grid(state.grid());
  const double dt = noise_->time_of(state.dt);
  double grad_sq = 0.0;
  kinetic(state.X, 0.5 * dt, nullptr);
  for (int i = 0; i < count; ++i) {
    phase(state.X, state.tick, state.tick + state.dt);
    state.tick += state.dt;
    if (i + 1 < count) {
      kinetic(state.X, dt, nullptr);
    } else {
      kinetic(state.X, 0.5 * dt, &grad_sq);
    }
  }
  if (!all_finite(state.X.values)) {
    throw Error(Errc::numeric_blowup, "non-finite value at t = " +
                                          std::to_string(state.t_origin +
                                                         noise_->time_of(state.tick)));
  }
  return grad_sq;
}

ComplexField to_u(const ComplexField& X, const NoiseRealization& noise, Tick t) {
  ComplexField u = X;
  if (noise.count() == 0 || t == 0) return u;
  const RealField w = eval_W(noise, t, X.grid);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= std::polar(1.0, -w[i]);
  return u;
}

ComplexField to_u(const ComplexField& X, const NoiseRealization& noise, double t) {
  return to_u(X, noise, noise.tick_of(t));
}

EvolveState refine(const EvolveState& state) {
  EvolveState out = state;
  const Grid& g = state.grid();
  out.X = spectral_interpolate(state.X, make_grid(g.dim, g.half_width, 2 * g.n, g.center));
  ++out.refinement_level;
  return out;
}

namespace {

constexpr std::array<char, 8> kMagic{'S', 'N', 'L', 'S', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(Errc::io_error, "truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(const EvolveState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot open " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put(out, kCheckpointVersion);
  const Grid& g = state.grid();
  put(out, state.tick);
  put(out, state.t_origin);
  put(out, state.dt);
  put(out, static_cast<std::int32_t>(g.dim));
  put(out, g.half_width);
  put(out, static_cast<std::int32_t>(g.n));
  put(out, g.center[0]);
  put(out, g.center[1]);
  put(out, static_cast<std::int32_t>(state.refinement_level));
  put(out, state.seed);
  put(out, static_cast<std::uint64_t>(state.X.size()));
  out.write(reinterpret_cast<const char*>(state.X.values.data()),
            static_cast<std::streamsize>(state.X.size() * sizeof(cplx)));
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

EvolveState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (magic != kMagic) throw Error(Errc::io_error, "not a checkpoint: " + path.string());
  if (const auto v = get<std::uint32_t>(in); v != kCheckpointVersion) {
    throw Error(Errc::io_error, "unsupported checkpoint version " + std::to_string(v));
  }
  EvolveState s;
  s.tick = get<Tick>(in);
  s.t_origin = get<double>(in);
  s.dt = get<Tick>(in);
  const int dim = get<std::int32_t>(in);
  const double half_width = get<double>(in);
  const int n = get<std::int32_t>(in);
  Point center{get<double>(in), 0.0};
  center[1] = get<double>(in);
  s.refinement_level = get<std::int32_t>(in);
  s.seed = get<std::uint64_t>(in);
  const auto count = get<std::uint64_t>(in);
  const Grid g = make_grid(dim, half_width, n, center);
  if (count != g.size()) throw Error(Errc::io_error, "checkpoint size mismatch");
  s.X = ComplexField(g);
  in.read(reinterpret_cast<char*>(s.X.values.data()),
          static_cast<std::streamsize>(count * sizeof(cplx)));
  if (!in) throw Error(Errc::io_error, "truncated checkpoint");
  return s;
}

}  // namespace snls
