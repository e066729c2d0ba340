#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "snls/grid.hpp"
#include "snls/noise.hpp"

namespace snls {

/// Free flow: X^(k) <- exp(-i |k|^2 dt) X^(k).
ComplexField step_kinetic(ComplexField X, double dt);
/// X <- X exp(i |X|^{4/d} dt), exact since |X| is invariant along this flow.
ComplexField step_nonlinear(ComplexField X, double dt);
/// X <- X exp(i dW); the exact flow of i X dW - mu X dt.
ComplexField step_noise(ComplexField X, const RealField& dW);

/// Deterministic Strang step K(dt/2) NL(dt) K(dt/2). Negative dt runs backwards.
ComplexField strang_step(ComplexField X, double dt);

struct StepFlags {
  bool kinetic = true;
  bool nonlinear = true;
  bool noise = true;

  bool operator==(const StepFlags&) const = default;
};

/// Everything needed to resume a path bit for bit.
struct EvolveState {
  Tick tick = 0;        // noise cursor; elapsed time = noise.time_of(tick)
  double t_origin = 0;  // physical time of tick 0
  Tick dt = 0;          // current step in ticks
  ComplexField X;
  int refinement_level = 0;
  std::uint64_t seed = 0;

  const Grid& grid() const { return X.grid; }
  bool operator==(const EvolveState&) const = default;
};

/// Advances an EvolveState on one noise path. Holds the sampled phi_k on the
/// current grid and the last W so that each step evaluates W once.
class Stepper {
 public:
  Stepper(const NoiseRealization& noise, StepFlags flags = {});

  /// Strang step K(dt/2) Noise(dW) NL(dt) K(dt/2) with dt = state.dt ticks.
  /// Throws Errc::numeric_blowup when a non-finite value appears.
  void step(EvolveState& state);

  /// `count` consecutive steps with the kinetic half-steps of neighbours merged.
  /// Agrees with repeated step() up to rounding. Returns |grad X|^2 from the
  /// last kinetic substep through Parseval (before the final half-step).
  double advance(EvolveState& state, int count);

  const StepFlags& flags() const { return flags_; }

 private:
  void ensure_grid(const Grid& g);
  void load_w(Tick t, std::vector<double>& w);
  void kinetic(ComplexField& X, double dt, double* grad_sq);
  void phase(ComplexField& X, Tick from, Tick to);

  const NoiseRealization* noise_;
  StepFlags flags_;
  PhiOnGrid phi_;
  std::vector<double> symbol_;  // |k|^2 per FFT slot
  Tick w_tick_ = -1;
  std::vector<double> w_;
  std::vector<double> w_next_;
};

/// u = exp(-i W(t)) X with t given in ticks of the realization.
ComplexField to_u(const ComplexField& X, const NoiseRealization& noise, Tick t);
ComplexField to_u(const ComplexField& X, const NoiseRealization& noise, double t);

/// Doubles N on the same box (exact band-limited refinement).
EvolveState refine(const EvolveState& state);

/// Versioned little-endian binary dump of an EvolveState.
void save_checkpoint(const EvolveState& state, const std::filesystem::path& path);
EvolveState load_checkpoint(const std::filesystem::path& path);

}  // namespace snls
