#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "snls/grid.hpp"
#include "snls/noise.hpp"

namespace snls {

struct GridConfig {
  int dim = 1;
  double half_width = 20.0;
  int n = 512;

  bool operator==(const GridConfig&) const = default;
};

struct TimeConfig {
  double dt0 = 1e-3;        // dt = dt0 * lambda_est^2
  double horizon = 5.0;     // elapsed time measured from t_start
  double t_start = 0.0;     // physical time of the initial datum
  int sample_every = 20;
  double base_dt = 1.0 / 64.0;  // coarsest Brownian lattice step

  bool operator==(const TimeConfig&) const = default;
};

struct NoiseConfig {
  std::vector<Bump> bumps;
  double amplitude = 1.0;    // multiplies every bump amplitude
  double path_bound = 10.0;  // C in sup_t sum_j ||beta_j||_M + ||c||_M <= C

  PhiFamily family(int dim) const;
  bool operator==(const NoiseConfig&) const = default;
};

enum class InitialPreset { ansatz, soliton_oracle, pseudo_conformal_oracle, zero };
enum class EpsRecipe { zero, q_multiple, gaussian };

struct InitialConfig {
  InitialPreset preset = InitialPreset::ansatz;
  double lambda0 = 0.1;
  double b0 = 0.2;
  EpsRecipe eps = EpsRecipe::zero;
  double eps_amplitude = 0.0;
  Point x0{0.0, 0.0};
  double gamma0 = 0.0;
  double mass_scale = 1.0;  // soliton preset: X_0 = mass_scale * Q

  bool operator==(const InitialConfig&) const = default;
};

struct ThresholdConfig {
  double alpha = 0.2;
  double h1_blowup = 1e6;
  double lambda_floor = 1e-4;
  int max_refinements = 6;
  double margin = 8.0;  // regrid when lambda_est < margin * dx

  bool operator==(const ThresholdConfig&) const = default;
};

struct EnsembleConfig {
  int n_paths = 1;
  std::uint64_t base_seed = 1;
  int workers = 1;

  bool operator==(const EnsembleConfig&) const = default;
};

struct OutputConfig {
  std::string directory = "snls_out";
  bool trajectories = true;
  bool brownian = false;

  bool operator==(const OutputConfig&) const = default;
};

struct FitConfig {
  double lambda_hi = 0.05;
  double lambda_lo = 2e-4;

  bool operator==(const FitConfig&) const = default;
};

struct SimConfig {
  GridConfig grid;
  TimeConfig time;
  NoiseConfig noise;
  InitialConfig initial;
  ThresholdConfig thresholds;
  EnsembleConfig ensemble;
  OutputConfig output;
  FitConfig fit;

  Grid make_grid() const;
  bool operator==(const SimConfig&) const = default;
};

/// Throws Errc::validation_error naming the first violated invariant.
void validate(const SimConfig& cfg);

/// Strict parse of the sectioned key = value format. Unknown sections or keys
/// are errors (Errc::parse_error with the line number).
SimConfig parse_config_text(const std::string& text);
SimConfig parse_config(const std::filesystem::path& path);

/// Canonical text form; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const SimConfig& cfg);

std::string to_string(InitialPreset p);
std::string to_string(EpsRecipe r);

}  // namespace snls
