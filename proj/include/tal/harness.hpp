// Copyright 2026 The TAL Racing Authors
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
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tal/config.hpp"
#include "tal/env.hpp"
#include "tal/raceline.hpp"
#include "tal/td3.hpp"
#include "tal/track.hpp"

namespace tal::harness
{

class HarnessError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct TrackBundle
{
  std::string name;
  track::TrackMap map;
  track::Centerline centerline;
  raceline::RaceTrajectory raceline;
};

/// Fixture name or map .yaml, the centerline (read or extracted) and the
/// raceline for the configured vehicle limits.
TrackBundle load_track(const config::ExperimentConfig & config);

env::RacingEnv make_env(
  const config::ExperimentConfig & config, const TrackBundle & track, bool training,
  std::uint64_t seed);

struct EpisodeRecord
{
  int episode{0};
  double reward{0.0};
  double progress{0.0};
  int steps{0};
  bool crashed{false};
  bool completed{false};
};

using TrainingCurve = std::vector<EpisodeRecord>;
std::string curve_to_csv(const TrainingCurve & curve);

struct TrainingResult
{
  td3::Td3Agent agent;
  TrainingCurve curve;
};

/// Runs the env/agent loop for config.train_steps. When `out_dir` is not
/// empty it receives config.txt, curve.csv and agent.ckpt.
TrainingResult run_training(
  const config::ExperimentConfig & config, const TrackBundle & track, std::uint64_t seed,
  const std::filesystem::path & out_dir = {}, std::ostream * log = nullptr);

using Policy = std::function<vehicle::ControlAction(
  const env::RacingEnv & env, std::span<const double> observation)>;

Policy classic_policy();
/// Deterministic actor output, scaled to physical units.
Policy agent_policy(const td3::Td3Agent & agent);

struct LapRecord
{
  int episode{0};
  bool completed{false};
  bool crashed{false};
  double progress{0.0};
  double lap_time{0.0};  // s, time at episode end
  int steps{0};
};

struct EvalSummary
{
  double completion_rate{0.0};
  double mean_lap_time{0.0};  // NaN when no lap was completed
  double mean_progress{0.0};
  std::vector<LapRecord> laps;
  std::vector<std::vector<env::TraceRow>> traces;  // one per episode when kept
};

/// Episodes from the fixed start s = 0.
EvalSummary run_evaluation(
  const config::ExperimentConfig & config, const TrackBundle & track, const Policy & policy,
  std::uint64_t seed, bool keep_traces = false);

std::string laps_to_csv(const EvalSummary & summary);

/// Trace of the first completed lap, or of the first episode when none
/// completed.
const std::vector<env::TraceRow> & representative_trace(const EvalSummary & summary);

struct SpeedSlipProfile
{
  std::vector<double> s;
  std::vector<double> speed;
  std::vector<double> abs_slip_deg;
  std::vector<double> classic_speed;
};

SpeedSlipProfile speed_slip_profile(std::span<const env::TraceRow> trace);
std::string speed_slip_to_csv(const SpeedSlipProfile & profile);
SpeedSlipProfile load_speed_slip_csv(std::string_view text);
/// Convenience: speed_slip_to_csv(speed_slip_profile(trace)).
std::string export_speed_slip_profile(std::span<const env::TraceRow> trace);

struct MatrixSpec
{
  std::vector<std::string> maps;
  std::vector<env::RewardMode> modes;
  std::vector<double> v_max;
  std::vector<std::uint64_t> seeds;
  int workers{1};
};

struct CellKey
{
  std::string map;
  env::RewardMode mode{env::RewardMode::kTal};
  double v_max{0.0};
  std::uint64_t seed{0};

  std::string dir_name() const;
};

struct ResultRow
{
  CellKey key;
  double completion_rate{0.0};
  double mean_lap_time{0.0};
  double mean_progress{0.0};
  std::int64_t train_steps{0};
  std::string status;  // ok | failed: <reason>
};

std::string results_to_csv(std::span<const ResultRow> rows);
std::vector<ResultRow> load_results_csv(std::string_view text);
/// Per (map, mode, v_max): means over seeds and a band that drops the
/// lowest and highest seed when at least three are present.
std::string summary_to_csv(std::span<const ResultRow> rows);

/// Trains and evaluates one cell into `dir` (config.txt, curve.csv,
/// agent.ckpt, eval.csv, trace.csv, speed_slip.csv, result.csv).
ResultRow run_cell(
  const config::ExperimentConfig & base, const TrackBundle & track, const CellKey & key,
  const std::filesystem::path & dir, std::ostream * log = nullptr);

/// Runs every cell under out_dir/cells, skipping cells whose result.csv
/// already reports ok for an identical config.txt, and writes
/// out_dir/results.csv and summary.csv.
std::vector<ResultRow> run_matrix(
  const config::ExperimentConfig & base, const MatrixSpec & spec,
  const std::filesystem::path & out_dir, std::ostream * log = nullptr);

void write_file(const std::filesystem::path & path, std::string_view contents);
std::string read_file(const std::filesystem::path & path);

}  // namespace tal::harness
