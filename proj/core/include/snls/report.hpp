#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "snls/ensemble.hpp"

namespace snls {

/// Column lists of the CSV outputs; d-dependent columns are expanded per axis.
std::vector<std::string> trajectory_columns(int dim);
std::vector<std::string> diagnostics_columns(int dim);
std::vector<std::string> aggregate_columns();

void write_trajectory_csv(const TrajectoryRecord& rec, int dim, const std::filesystem::path& path);
void write_diagnostics_csv(const TrajectoryRecord& rec, int dim, const std::filesystem::path& path);
void write_fit_json(const PathSummary& summary, const FitConfig& fit, const std::filesystem::path& path);

/// JSON text of the summary. Keys sorted, no timestamps, no worker count.
std::string summary_json(const EnsembleSummary& summary, const SimConfig& cfg);

struct AggregateRow {
  double t = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  int active = 0;
};

/// lambda^{-1} across paths on `points` uniform times, linear in t between samples.
std::vector<AggregateRow> aggregate_inverse_lambda(const std::vector<TrajectoryRecord>& records,
                                                   int points = 200);

struct ReportOptions {
  int workers = 1;  // recorded in the manifest only
  std::string timestamp;  // manifest only; filled with the current UTC time when empty
};

/// Writes paths/ (trajectory and diagnostics CSVs, fit JSON per seed),
/// aggregate.csv, config.snls, seeds.json and finally summary.json.
/// Throws Errc::io_error on any write failure.
void emit_report(const std::filesystem::path& dir, const SimConfig& cfg,
                 const EnsembleResult& result, const ReportOptions& opts = {});

}  // namespace snls
