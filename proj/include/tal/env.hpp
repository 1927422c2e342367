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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tal/lidar.hpp"
#include "tal/pursuit.hpp"
#include "tal/raceline.hpp"
#include "tal/rng.hpp"
#include "tal/track.hpp"
#include "tal/vehicle.hpp"

namespace tal::env
{

class EnvError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class RewardMode
{
  kTal,
  kBaseline,
};

std::string_view to_string(RewardMode mode);
/// "tal" | "baseline"
RewardMode parse_reward_mode(std::string_view text);

inline constexpr double kPlanningPeriod =
  vehicle::kSubstepDt * static_cast<double>(vehicle::kSubstepsPerPlan);

struct EnvConfig
{
  RewardMode reward_mode{RewardMode::kTal};
  // Divide the TAL action differences by v_max and steer_max.
  bool tal_normalized{false};
  double shaping_scale{0.2};
  double crash_reward{-1.0};
  double lap_reward{1.0};
  double collision_radius{0.16};  // m, half the body width plus a cell of slack
  bool random_start{false};
  double step_budget_slack{20.0};  // s, added to the lap time at v_min
  vehicle::VehicleParams vehicle{};
  lidar::LidarConfig lidar{};
  pursuit::PursuitConfig pursuit{};

  void validate() const;
};

/// Components clamped to [-1, 1]; a[0] steers, a[1] picks the speed in
/// [1, v_max].
vehicle::ControlAction scale_action(
  std::span<const double> normalized, const vehicle::VehicleParams & params);

/// 0.2 * max(0, 1 - |dv| - |dsteer|), differences in m/s and rad (or divided
/// by v_max and steer_max when `normalized`).
double reward_tal(
  const vehicle::ControlAction & agent, const vehicle::ControlAction & classic, double v_max,
  double steer_max, bool normalized = false, double scale = 0.2);

/// (v / v_max) cos(psi) - |d_c|
double reward_baseline(double speed, double psi, double d_c, double v_max);

/// Forward progress along a closed line, robust to wrap-around at s = 0.
class LapTracker
{
public:
  explicit LapTracker(double total_length);

  void reset(double s_start);
  void update(double s);

  double traversed() const { return traversed_; }
  double progress() const;
  bool complete() const { return complete_; }
  double start() const { return start_; }

private:
  double total_;
  double start_{0.0};
  double last_{0.0};
  double traversed_{0.0};
  bool complete_{false};
};

/// Replays projected arc lengths (the first entry is the start) through a
/// LapTracker.
bool lap_complete(std::span<const double> s_history, double total_length);

struct StepInfo
{
  double progress{0.0};
  double lap_time{0.0};  // s since reset
  bool crashed{false};
  bool lap_complete{false};
  bool truncated{false};  // step budget exhausted
  int step{0};
  vehicle::VehicleState state{};
  vehicle::ControlAction agent_action{};
  vehicle::ControlAction classic_action{};
  track::PoseProjection projection{};
  std::string diagnostic;  // set when the dynamics blew up
};

struct StepOutcome
{
  std::vector<double> observation;
  double reward{0.0};
  bool done{false};
  StepInfo info;
};

struct TraceRow
{
  double time{0.0};
  vehicle::VehicleState state{};
  double s{0.0};
  double d_c{0.0};
  double psi{0.0};
  vehicle::ControlAction agent{};
  vehicle::ControlAction classic{};
  double reward{0.0};
};

std::string trace_to_csv(std::span<const TraceRow> rows);
std::vector<TraceRow> load_trace_csv(std::string_view text);

class RacingEnv
{
public:
  RacingEnv(
    track::TrackMap map, track::Centerline centerline, raceline::RaceTrajectory raceline,
    EnvConfig config, std::uint64_t seed);

  /// Places the car on the centerline at s_start (default: 0, or uniform when
  /// random_start is set) at v_min, aligned with the tangent.
  std::vector<double> reset(std::optional<double> s_start = std::nullopt);
  StepOutcome step(std::span<const double> normalized_action);
  StepOutcome step_control(const vehicle::ControlAction & action);

  /// What the classic planner would command from the current state.
  vehicle::ControlAction classic_action() const;

  std::size_t observation_size() const;
  const vehicle::VehicleState & state() const { return state_; }
  int steps() const { return steps_; }
  int step_budget() const { return step_budget_; }
  bool done() const { return done_; }
  const LapTracker & lap() const { return lap_; }
  const EnvConfig & config() const { return config_; }
  const track::TrackMap & map() const { return map_; }
  const track::Centerline & centerline() const { return centerline_; }
  const raceline::RaceTrajectory & raceline() const { return raceline_; }

  void set_record_trace(bool on) { record_trace_ = on; }
  const std::vector<TraceRow> & trace() const { return trace_; }

private:
  std::vector<double> observe();

  track::TrackMap map_;
  track::Centerline centerline_;
  raceline::RaceTrajectory raceline_;
  EnvConfig config_;
  Rng start_rng_;
  Rng noise_rng_;
  vehicle::VehicleState state_{};
  std::vector<double> prev_scan_;
  std::vector<double> scan_;
  LapTracker lap_;
  double track_s_{0.0};
  double raceline_s_{0.0};
  int steps_{0};
  int step_budget_{0};
  bool done_{true};
  bool record_trace_{false};
  std::vector<TraceRow> trace_;
};

}  // namespace tal::env
