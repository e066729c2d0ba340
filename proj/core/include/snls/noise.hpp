#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_map>
#include <vector>

#include "snls/grid.hpp"

namespace snls {

/// phi(x) = amplitude * exp(-|x - center|^2 / (2 sigma^2)).
struct Bump {
  double amplitude = 0.0;
  Point center{0.0, 0.0};
  double sigma = 1.0;

  bool operator==(const Bump&) const = default;
};

/// Finite family of real Gaussian bumps. Derivatives of any order are
/// closed form (Hermite polynomials times the Gaussian).
struct PhiFamily {
  int dim = 1;
  std::vector<Bump> bumps;

  int count() const { return static_cast<int>(bumps.size()); }
  /// d^{orders} phi_k at x; orders[1] is ignored in 1d.
  double derivative(int k, Point x, std::array<int, 2> orders) const;
  double value(int k, Point x) const { return derivative(k, x, {0, 0}); }

  bool operator==(const PhiFamily&) const = default;
};

/// Times live on an exact dyadic lattice: t = tick * base_dt / 2^kMaxLevel.
using Tick = std::int64_t;
inline constexpr int kMaxLevel = 40;
inline constexpr Tick kTicksPerBase = Tick{1} << kMaxLevel;

/// Brownian paths B_1..B_K built by an increment tree keyed on
/// (seed, k, level, index): level 0 holds independent increments on the
/// base step, finer levels are Brownian-bridge midpoints. Values at a node
/// never depend on which other nodes were queried, so refining the time step
/// reproduces coarse values bitwise.
class NoiseRealization {
 public:
  NoiseRealization() = default;
  NoiseRealization(PhiFamily phi, double base_dt, std::uint64_t seed);

  const PhiFamily& phi() const { return phi_; }
  int count() const { return phi_.count(); }
  double base_dt() const { return base_dt_; }
  std::uint64_t seed() const { return seed_; }

  double time_of(Tick t) const;
  /// Throws Errc::off_grid_time unless t is (exactly) a lattice node.
  Tick tick_of(double t) const;

  /// B_k at node t. Not thread safe: one realization per worker.
  double brownian(int k, Tick t) const;
  std::vector<double> brownian_all(Tick t) const;

  /// Grid requested at sampling time and the materialized values there.
  std::vector<double> times;
  std::vector<std::vector<double>> bpaths;  // bpaths[n][k] = B_k(times[n])

 private:
  const std::vector<double>& node(Tick t) const;
  double gaussian(int k, int level, std::int64_t index) const;

  PhiFamily phi_;
  double base_dt_ = 1.0 / 64.0;
  std::uint64_t seed_ = 0;
  mutable std::vector<std::vector<double>> level0_;  // level0_[j][k] = B_k(j * base_dt)
  mutable std::unordered_map<Tick, std::vector<double>> fine_;
};

NoiseRealization sample_brownian(const PhiFamily& phi, std::span<const double> times,
                                 std::uint64_t seed, double base_dt = 1.0 / 64.0);

/// phi_k sampled on a grid, reused by every step on that grid.
struct PhiOnGrid {
  Grid grid;
  std::vector<std::vector<double>> phi;

  PhiOnGrid() = default;
  PhiOnGrid(const PhiFamily& family, const Grid& g);
  /// sum_k phi_k * weights[k], written into out.
  void combine(std::span<const double> weights, std::span<double> out) const;
};

RealField eval_W(const NoiseRealization& noise, Tick t, const Grid& grid);
RealField eval_W(const NoiseRealization& noise, double t, const Grid& grid);

/// Coefficients of the rescaled equation
/// i u_t + Delta u + i beta.grad u + c u + |u|^{4/d} u = 0.
struct NoiseCoefficients {
  std::vector<RealField> beta;  // one per axis
  ComplexField c;
  RealField mu;
};

NoiseCoefficients eval_coeffs(const PhiFamily& phi, std::span<const double> bvals,
                              const Grid& grid);
NoiseCoefficients eval_coeffs(const NoiseRealization& noise, Tick t, const Grid& grid);
NoiseCoefficients eval_coeffs(const NoiseRealization& noise, double t, const Grid& grid);

/// M-norms sup |x^a d^b f| over multi-indices |a|, |b| <= 2 for f in {beta_j, c}.
struct MNorm {
  std::vector<double> beta;
  double c = 0.0;
  double c_real = 0.0;
  double c_imag = 0.0;

  double max() const;
  /// sum_j ||beta_j||_M + ||c||_M, the quantity bounded on accepted paths.
  double sum() const;
};

MNorm m_norm(const PhiFamily& phi, std::span<const double> bvals, const Grid& grid);

struct PathBoundReport {
  bool ok = true;
  double worst = 0.0;
  double worst_time = 0.0;
};

/// sup over base-lattice nodes t <= horizon of MNorm::sum() compared with `bound`.
PathBoundReport check_path_bound(const NoiseRealization& noise, double horizon, double bound,
                                 const Grid& grid);

/// CSV dump: t,B_1,...,B_K at the realization's materialized times.
void write_brownian_csv(const NoiseRealization& noise, const std::filesystem::path& path);

}  // namespace snls
