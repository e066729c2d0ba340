#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "snls/config.hpp"
#include "snls/diagnostics.hpp"
#include "snls/evolve.hpp"
#include "snls/ground_state.hpp"
#include "snls/modulation.hpp"
#include "snls/noise.hpp"

namespace snls {

enum class StopReason { blowup_detected, horizon_reached, numeric_failure, path_rejected };

std::string to_string(StopReason r);

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  StopReason stop = StopReason::horizon_reached;
  std::string stop_detail;
  std::vector<TrajectoryRow> rows;
  bool has_constraints = false;
  ConstraintReport constraints;
  PathBoundReport path_bound;
  EvolveState final_state;
  long long steps = 0;
  double initial_mass = 0.0;
  double max_mass_drift = 0.0;  // relative, over the samples
};

struct PathOptions {
  StepFlags flags;
  bool modulation = true;  // run decompose at every sample
  /// Called after every sample, e.g. for progress output. An exception thrown
  /// here ends the path; run_paths records it as numeric_failure.
  std::function<void(std::uint64_t seed, const TrajectoryRow&)> on_sample;
};

/// Reference ground state on a y-grid fine enough for exact norms:
/// L = 40, N = 4096 in 1d; L = 16, N = 256 in 2d.
GroundState reference_ground_state(int dim);

/// S(t, x) = |t|^{-d/2} Q(x/t) exp(-i/t + i|x|^2/(4t)), t != 0.
ComplexField pseudo_conformal(double t, const RadialProfile& profile, const Grid& grid);

/// Initial datum for the configured preset; fills `report` for the ansatz preset.
ComplexField initial_field(const SimConfig& cfg, const GroundState& gs, const Grid& grid,
                           ConstraintReport* report = nullptr);

/// One noise path: Strang steps with dt = dt0 * lambda_est^2 (power-of-two ticks),
/// same-box refinement when lambda_est < margin * dx, a sample (modulation plus
/// monitored quantities on u) every `sample_every` steps. Numeric failures are
/// reported through the stop reason, never thrown.
TrajectoryRecord run_path(const SimConfig& cfg, std::uint64_t seed, const GroundState& gs,
                          const PathOptions& opts = {});

}  // namespace snls
