// Copyright 2026 The ACL Backflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "acl/dynamics.hpp"
#include "acl/model.hpp"
#include "acl/quantifiers.hpp"

namespace acl {

inline constexpr std::string_view kSoftwareVersion = "1.0.0";
inline constexpr int kCsvSchemaVersion = 1;

inline constexpr std::string_view kSeriesHeader =
    "t,D_S,sqrtJ_S,D_corr1,D_corr2,sqrtJ_corr1,sqrtJ_corr2,D_env,sqrtJ_env,"
    "D_bound_rhs,sqrtJ_bound_rhs,D_Iext,sqrtJ_Iext,deltaX,deltaY";
inline constexpr std::string_view kSummaryHeader = "gamma,T,seed,N_D,N_sqrtJ,D_S_t0,max_revival_D";
inline constexpr std::string_view kWavepacketHeader = "t,q,p";

/// Invalid or inconsistent configuration (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output could not be written (exit code 4).
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { Single, Sweep, Convergence, Wavepacket };

std::string_view to_string(RunMode m);
RunMode parse_run_mode(std::string_view s);

struct SweepConfig {
  std::vector<double> gamma_values = {0.32, 0.55, 1.0};
  std::vector<double> temp_values = {1.0};
  std::vector<std::uint64_t> seeds;  // empty: the model seed
};

struct WavepacketConfig {
  double q_min = -8.0;
  double q_max = 8.0;
  double q_step = 0.01;
  std::vector<double> sample_times;  // empty: k pi/4, k = 0..8
  double gamma = 0.32;
  double temp = 0.1;

  std::vector<double> q_grid() const;
  std::vector<double> times() const;
};

struct RunConfig {
  ModelParams model;
  RunMode mode = RunMode::Single;
  std::filesystem::path output_dir = "out";
  bool emit_globals_derived = true;
  SweepConfig sweep;
  WavepacketConfig wavepacket;
  unsigned workers = 0;  // 0: hardware concurrency

  /// Throws ConfigError.
  void validate() const;
  unsigned resolved_workers() const;

  /// Keys mirror the struct fields; unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

RunConfig load_config(const std::filesystem::path& path);

/// Shortest round-trip decimal, locale independent; NaN prints as "nan".
std::string format_double(double v);

struct SeriesOptions {
  bool with_globals = true;
  Propagation method = Propagation::PureBranches;
  bool parallel_branches = false;
};

/// Full pipeline without I/O: operators, initial pair, streamed evolution.
QuantifierSeries compute_series(const ModelParams& params, const SeriesOptions& opts = {});

void write_series_csv(const std::filesystem::path& path, const QuantifierSeries& series);
/// Reads one column of a series/summary CSV by header name.
std::vector<double> read_csv_column(const std::filesystem::path& path, std::string_view column);

struct RunOutcome {
  QuantifierSeries series;
  SummaryRecord summary;
  std::vector<std::filesystem::path> files;
};

/// series.csv + manifest.json in config.output_dir.
RunOutcome run_single(const RunConfig& config);

struct SweepPointStatus {
  double gamma = 0.0;
  double temp = 0.0;
  std::uint64_t seed = 0;
  std::string directory;
  bool ok = false;
  std::string error;
};

struct SweepOutcome {
  std::vector<SummaryRecord> summary;  // successful points, sweep order
  std::vector<SweepPointStatus> points;
  bool partial_failure() const;
};

std::string point_directory_name(double gamma, double temp, std::uint64_t seed);

/// summary.csv + one series directory per (gamma, T, seed) + manifest.json.
SweepOutcome run_sweep(const RunConfig& config);

enum class ConvergenceQuantity { BlpMeasure, FullSeries };

/// Deviations below this floor are numerically zero.
inline constexpr double kConvergenceFloor = 1e-9;

/// |a - b| / max(|a|, |b|), or 0 when both magnitudes are under kConvergenceFloor.
double relative_deviation(double a, double b);

struct ConvergenceReport {
  double dt = 0.0;
  double dt_fine = 0.0;
  ConvergenceQuantity quantity = ConvergenceQuantity::BlpMeasure;
  KindValues coarse;     // quantity at dt (N, or unused for full series)
  KindValues fine;       // quantity at dt/2
  KindValues deviation;  // max relative deviation per kind
};

/// Runs the distinguishability pipeline at dt and dt/2.
ConvergenceReport convergence_check(const ModelParams& params, const ModelOperators& ops,
                                    const InitialPair& init,
                                    ConvergenceQuantity quantity = ConvergenceQuantity::BlpMeasure);

/// convergence.json in config.output_dir.
ConvergenceReport run_convergence(const RunConfig& config);

struct WavepacketOutcome {
  WavepacketSeries free;
  WavepacketSeries damped;
};

/// wavepacket_free.csv and wavepacket_damped.csv.
WavepacketOutcome run_wavepacket(const RunConfig& config);

}  // namespace acl
