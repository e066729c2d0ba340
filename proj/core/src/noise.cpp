#include "snls/noise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

#include "snls/error.hpp"

namespace snls {
namespace {

// Probabilists' Hermite polynomial He_n(z).
double hermite(int n, double z) {
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = z;
  for (int m = 1; m < n; ++m) {
    const double next = z * cur - m * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// d^n/dx^n exp(-(x-c)^2 / (2 s^2)) = (-1/s)^n He_n(z) exp(-z^2/2), z = (x-c)/s.
double gaussian_derivative(int n, double x, double c, double s) {
  const double z = (x - c) / s;
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return sign * std::pow(s, -n) * hermite(n, z) * std::exp(-0.5 * z * z);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

double PhiFamily::derivative(int k, Point x, std::array<int, 2> orders) const {
  const Bump& b = bumps.at(static_cast<std::size_t>(k));
  double v = b.amplitude * gaussian_derivative(orders[0], x[0], b.center[0], b.sigma);
  if (dim == 2) v *= gaussian_derivative(orders[1], x[1], b.center[1], b.sigma);
  return v;
}

NoiseRealization::NoiseRealization(PhiFamily phi, double base_dt, std::uint64_t seed)
    : phi_(std::move(phi)), base_dt_(base_dt), seed_(seed) {
  if (!(base_dt > 0.0)) throw Error(Errc::invalid_argument, "base_dt must be positive");
  for (const auto& b : phi_.bumps) {
    if (!(b.sigma > 0.0)) throw Error(Errc::invalid_argument, "bump width must be positive");
  }
  level0_.push_back(std::vector<double>(static_cast<std::size_t>(count()), 0.0));
}

double NoiseRealization::time_of(Tick t) const {
  return std::ldexp(static_cast<double>(t), -kMaxLevel) * base_dt_;
}

Tick NoiseRealization::tick_of(double t) const {
  if (!(t >= 0.0)) throw Error(Errc::off_grid_time, "negative time");
  const double q = std::ldexp(t / base_dt_, kMaxLevel);
  const auto tick = static_cast<Tick>(std::llround(q));
  const double back = time_of(tick);
  if (std::abs(back - t) > 4.0 * std::numeric_limits<double>::epsilon() * std::max(t, base_dt_)) {
    throw Error(Errc::off_grid_time, "time " + std::to_string(t) + " is not a lattice node");
  }
  return tick;
}

double NoiseRealization::gaussian(int k, int level, std::int64_t index) const {
  std::uint64_t key = splitmix64(seed_);
  key = splitmix64(key ^ static_cast<std::uint64_t>(k));
  key = splitmix64(key ^ static_cast<std::uint64_t>(level));
  key = splitmix64(key ^ static_cast<std::uint64_t>(index));
  std::mt19937_64 engine(key);
  std::normal_distribution<double> normal(0.0, 1.0);
  return normal(engine);
}

const std::vector<double>& NoiseRealization::node(Tick t) const {
  const int kk = count();
  if (t % kTicksPerBase == 0) {
    const auto j = static_cast<std::size_t>(t / kTicksPerBase);
    const double scale = std::sqrt(base_dt_);
    while (level0_.size() <= j) {
      const auto prev_index = static_cast<std::int64_t>(level0_.size() - 1);
      std::vector<double> next = level0_.back();
      for (int k = 0; k < kk; ++k) next[k] += scale * gaussian(k, 0, prev_index);
      level0_.push_back(std::move(next));
    }
    return level0_[j];
  }
  if (auto it = fine_.find(t); it != fine_.end()) return it->second;

  const int tz = std::countr_zero(static_cast<std::uint64_t>(t));
  const int level = kMaxLevel - tz;
  const Tick half_span = Tick{1} << tz;
  const std::vector<double> left = node(t - half_span);
  const std::vector<double>& right = node(t + half_span);
  // Conditional variance of the midpoint of an interval of length h is h/4.
  const double sd = std::sqrt(0.25 * time_of(2 * half_span));
  std::vector<double> mid(static_cast<std::size_t>(kk));
  const std::int64_t index = t >> tz;
  for (int k = 0; k < kk; ++k) {
    mid[k] = 0.5 * (left[k] + right[k]) + sd * gaussian(k, level, index);
  }
  return fine_.emplace(t, std::move(mid)).first->second;
}

double NoiseRealization::brownian(int k, Tick t) const {
  if (t < 0) throw Error(Errc::off_grid_time, "negative tick");
  return node(t).at(static_cast<std::size_t>(k));
}

std::vector<double> NoiseRealization::brownian_all(Tick t) const {
  if (t < 0) throw Error(Errc::off_grid_time, "negative tick");
  return node(t);
}

NoiseRealization sample_brownian(const PhiFamily& phi, std::span<const double> times,
                                 std::uint64_t seed, double base_dt) {
  if (times.empty()) throw Error(Errc::empty_time_grid, "no sample times");
  if (times.front() != 0.0) throw Error(Errc::invalid_argument, "time grid must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw Error(Errc::invalid_argument, "time grid must be strictly increasing");
    }
  }
  NoiseRealization noise(phi, base_dt, seed);
  noise.times.assign(times.begin(), times.end());
  noise.bpaths.reserve(times.size());
  for (double t : times) noise.bpaths.push_back(noise.brownian_all(noise.tick_of(t)));
  return noise;
}

PhiOnGrid::PhiOnGrid(const PhiFamily& family, const Grid& g) : grid(g) {
  phi.resize(static_cast<std::size_t>(family.count()));
  for (int k = 0; k < family.count(); ++k) {
    auto& v = phi[static_cast<std::size_t>(k)];
    v.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = family.value(k, g.position(i));
  }
}

void PhiOnGrid::combine(std::span<const double> weights, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double w = weights[k];
    if (w == 0.0) continue;
    const auto& v = phi[k];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * v[i];
  }
}

RealField eval_W(const NoiseRealization& noise, Tick t, const Grid& grid) {
  RealField w(grid);
  if (noise.count() == 0) return w;
  PhiOnGrid(noise.phi(), grid).combine(noise.brownian_all(t), w.values);
  return w;
}

RealField eval_W(const NoiseRealization& noise, double t, const Grid& grid) {
  return eval_W(noise, noise.tick_of(t), grid);
}

namespace {

using Orders = std::array<int, 2>;

Orders unit(int axis) { return axis == 0 ? Orders{1, 0} : Orders{0, 1}; }
Orders add(Orders a, Orders b) { return {a[0] + b[0], a[1] + b[1]}; }

// sum_k B_k d^{orders} phi_k (x)
double weighted_derivative(const PhiFamily& phi, std::span<const double> bvals, Point x,
                           Orders orders) {
  double acc = 0.0;
  for (int k = 0; k < phi.count(); ++k) {
    const double b = bvals[static_cast<std::size_t>(k)];
    if (b != 0.0) acc += b * phi.derivative(k, x, orders);
  }
  return acc;
}

// Multi-indices of total order <= 2 in d dimensions.
std::vector<Orders> multi_indices(int dim) {
  if (dim == 1) return {{0, 0}, {1, 0}, {2, 0}};
  return {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
}

double monomial(Point x, Orders a) { return std::pow(x[0], a[0]) * std::pow(x[1], a[1]); }

}  // namespace

NoiseCoefficients eval_coeffs(const PhiFamily& phi, std::span<const double> bvals,
                              const Grid& grid) {
  NoiseCoefficients out;
  out.c = ComplexField(grid);
  out.mu = RealField(grid);
  for (int j = 0; j < grid.dim; ++j) out.beta.emplace_back(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.position(i);
    double re_c = 0.0;
    double im_c = 0.0;
    for (int j = 0; j < grid.dim; ++j) {
      const double g = weighted_derivative(phi, bvals, x, unit(j));
      out.beta[static_cast<std::size_t>(j)][i] = 2.0 * g;
      re_c -= g * g;
      im_c += weighted_derivative(phi, bvals, x, add(unit(j), unit(j)));
    }
    out.c[i] = cplx(re_c, im_c);
    double mu = 0.0;
    for (int k = 0; k < phi.count(); ++k) mu += std::pow(phi.value(k, x), 2);
    out.mu[i] = 0.5 * mu;
  }
  return out;
}

NoiseCoefficients eval_coeffs(const NoiseRealization& noise, Tick t, const Grid& grid) {
  const auto b = noise.brownian_all(t);
  return eval_coeffs(noise.phi(), b, grid);
}

NoiseCoefficients eval_coeffs(const NoiseRealization& noise, double t, const Grid& grid) {
  return eval_coeffs(noise, noise.tick_of(t), grid);
}

double MNorm::max() const {
  double m = std::max(c, 0.0);
  for (double v : beta) m = std::max(m, v);
  return m;
}

double MNorm::sum() const {
  double s = c;
  for (double v : beta) s += v;
  return s;
}

MNorm m_norm(const PhiFamily& phi, std::span<const double> bvals, const Grid& grid) {
  const auto idx = multi_indices(grid.dim);
  MNorm out;
  out.beta.assign(static_cast<std::size_t>(grid.dim), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.position(i);
    for (const Orders& b : idx) {
      double re_c = 0.0;
      double im_c = 0.0;
      for (int j = 0; j < grid.dim; ++j) {
        const Orders ej = unit(j);
        const double dbeta = 2.0 * weighted_derivative(phi, bvals, x, add(ej, b));
        // d^b of -(g_j)^2 by the Leibniz rule, g_j = sum_k B_k d_j phi_k.
        const double g = weighted_derivative(phi, bvals, x, ej);
        const int order = b[0] + b[1];
        if (order == 0) {
          re_c -= g * g;
        } else if (order == 1) {
          re_c -= 2.0 * g * weighted_derivative(phi, bvals, x, add(ej, b));
        } else {
          Orders first = b[0] > 0 ? Orders{1, 0} : Orders{0, 1};
          Orders second = {b[0] - first[0], b[1] - first[1]};
          const double ga = weighted_derivative(phi, bvals, x, add(ej, first));
          const double gb = weighted_derivative(phi, bvals, x, add(ej, second));
          const double gab = weighted_derivative(phi, bvals, x, add(ej, b));
          re_c -= 2.0 * (ga * gb + g * gab);
        }
        im_c += weighted_derivative(phi, bvals, x, add(add(ej, ej), b));
        for (const Orders& a : idx) {
          const double w = std::abs(monomial(x, a));
          out.beta[static_cast<std::size_t>(j)] =
              std::max(out.beta[static_cast<std::size_t>(j)], w * std::abs(dbeta));
        }
      }
      for (const Orders& a : idx) {
        const double w = std::abs(monomial(x, a));
        out.c = std::max(out.c, w * std::hypot(re_c, im_c));
        out.c_real = std::max(out.c_real, w * std::abs(re_c));
        out.c_imag = std::max(out.c_imag, w * std::abs(im_c));
      }
    }
  }
  return out;
}

PathBoundReport check_path_bound(const NoiseRealization& noise, double horizon, double bound,
                                 const Grid& grid) {
  PathBoundReport report;
  const Tick last = static_cast<Tick>(std::floor(horizon / noise.base_dt())) * kTicksPerBase;
  for (Tick t = 0; t <= last; t += kTicksPerBase) {
    const auto b = noise.brownian_all(t);
    const double value = m_norm(noise.phi(), b, grid).sum();
    if (value > report.worst) {
      report.worst = value;
      report.worst_time = noise.time_of(t);
    }
  }
  report.ok = report.worst <= bound;
  return report;
}

void write_brownian_csv(const NoiseRealization& noise, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot open " + path.string());
  out << "t";
  for (int k = 1; k <= noise.count(); ++k) out << ",B_" << k;
  out << '\n' << std::setprecision(17);
  for (std::size_t n = 0; n < noise.times.size(); ++n) {
    out << noise.times[n];
    for (double b : noise.bpaths[n]) out << ',' << b;
    out << '\n';
  }
}

}  // namespace snls
