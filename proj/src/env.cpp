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


#include "tal/env.hpp"

#include <algorithm>
#include <cmath>

#include "tal/csv.hpp"

namespace tal::env
{
namespace
{

const std::vector<std::string> kTraceHeader = {
  "time_s",     "x_m",        "y_m",      "yaw_rad",         "v_mps",
  "steer_rad",  "slip_rad",   "s_m",      "d_c_m",           "psi_rad",
  "agent_steer_rad", "agent_speed_mps", "classic_steer_rad", "classic_speed_mps", "reward"};

// Signed arc-length difference b - a on a loop, in (-L/2, L/2].
double loop_delta(double a, double b, double total)
{
  double d = b - a;
  if (d > total / 2.0) {
    d -= total;
  } else if (d <= -total / 2.0) {
    d += total;
  }
  return d;
}

}  // namespace

std::string_view to_string(RewardMode mode)
{
  return mode == RewardMode::kTal ? "tal" : "baseline";
}

RewardMode parse_reward_mode(std::string_view text)
{
  if (text == "tal" || text == "TAL") {
    return RewardMode::kTal;
  }
  if (text == "baseline") {
    return RewardMode::kBaseline;
  }
  throw EnvError("unknown reward mode: " + std::string(text));
}

void EnvConfig::validate() const
{
  vehicle.validate();
  pursuit.validate();
  if (!(shaping_scale > 0.0) || !(collision_radius > 0.0) || step_budget_slack < 0.0) {
    throw EnvError("env: shaping scale and collision radius must be positive");
  }
  if (lidar.n_beams < 2 || !(lidar.max_range > 0.0)) {
    throw EnvError("env: lidar needs at least two beams and a positive range");
  }
}

vehicle::ControlAction scale_action(
  std::span<const double> normalized, const vehicle::VehicleParams & params)
{
  if (normalized.size() != 2) {
    throw EnvError("scale_action: expected two components");
  }
  const double a0 = std::clamp(normalized[0], -1.0, 1.0);
  const double a1 = std::clamp(normalized[1], -1.0, 1.0);
  return {a0 * params.steer_max, params.v_min + (a1 + 1.0) / 2.0 * (params.v_max - params.v_min)};
}

double reward_tal(
  const vehicle::ControlAction & agent, const vehicle::ControlAction & classic, double v_max,
  double steer_max, bool normalized, double scale)
{
  double dv = std::abs(agent.speed_ref - classic.speed_ref);
  double ds = std::abs(agent.steer_ref - classic.steer_ref);
  if (normalized) {
    dv /= v_max;
    ds /= steer_max;
  }
  return scale * std::max(0.0, 1.0 - dv - ds);
}

double reward_baseline(double speed, double psi, double d_c, double v_max)
{
  return speed / v_max * std::cos(psi) - std::abs(d_c);
}

LapTracker::LapTracker(double total_length) : total_(total_length)
{
  if (!(total_length > 0.0)) {
    throw EnvError("LapTracker: track length must be positive");
  }
}

void LapTracker::reset(double s_start)
{
  start_ = s_start;
  last_ = s_start;
  traversed_ = 0.0;
  complete_ = false;
}

void LapTracker::update(double s)
{
  const double rel_prev = std::fmod(loop_delta(start_, last_, total_) + total_, total_);
  traversed_ += loop_delta(last_, s, total_);
  last_ = s;
  const double rel = std::fmod(loop_delta(start_, s, total_) + total_, total_);
  // Crossing the start line forwards: relative position wraps from the end
  // of the loop back to its beginning.
  const bool crossed = rel_prev > total_ / 2.0 && rel < total_ / 2.0;
  if (crossed && traversed_ >= total_) {
    complete_ = true;
  }
}

double LapTracker::progress() const { return std::clamp(traversed_ / total_, 0.0, 1.0); }

bool lap_complete(std::span<const double> s_history, double total_length)
{
  if (s_history.empty()) {
    return false;
  }
  LapTracker lap(total_length);
  lap.reset(s_history.front());
  for (std::size_t i = 1; i < s_history.size(); ++i) {
    lap.update(s_history[i]);
    if (lap.complete()) {
      return true;
    }
  }
  return false;
}

std::string trace_to_csv(std::span<const TraceRow> rows)
{
  csv::Writer w(kTraceHeader);
  for (const auto & r : rows) {
    w.row({r.time, r.state.x, r.state.y, r.state.yaw, r.state.speed, r.state.steer, r.state.slip,
           r.s, r.d_c, r.psi, r.agent.steer_ref, r.agent.speed_ref, r.classic.steer_ref,
           r.classic.speed_ref, r.reward});
  }
  return w.str();
}

std::vector<TraceRow> load_trace_csv(std::string_view text)
{
  const auto table = csv::parse(text);
  if (table.header != kTraceHeader) {
    throw EnvError("trace CSV header does not match");
  }
  std::vector<TraceRow> rows(table.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto v = [&](std::size_t c) { return table.number(i, c); };
    auto & r = rows[i];
    r.time = v(0);
    r.state.x = v(1);
    r.state.y = v(2);
    r.state.yaw = v(3);
    r.state.speed = v(4);
    r.state.steer = v(5);
    r.state.slip = v(6);
    r.s = v(7);
    r.d_c = v(8);
    r.psi = v(9);
    r.agent = {v(10), v(11)};
    r.classic = {v(12), v(13)};
    r.reward = v(14);
  }
  return rows;
}

RacingEnv::RacingEnv(
  track::TrackMap map, track::Centerline centerline, raceline::RaceTrajectory raceline,
  EnvConfig config, std::uint64_t seed)
: map_(std::move(map)),
  centerline_(std::move(centerline)),
  raceline_(std::move(raceline)),
  config_(std::move(config)),
  start_rng_(make_stream(seed, "env.start")),
  noise_rng_(make_stream(seed, "env.noise")),
  lap_(centerline_.total_length)
{
  config_.validate();
  if (!centerline_.closed || !raceline_.closed) {
    throw EnvError("racing env needs closed centerline and raceline");
  }
  const double budget_s =
    centerline_.total_length / config_.vehicle.v_min + config_.step_budget_slack;
  step_budget_ = static_cast<int>(std::ceil(budget_s / kPlanningPeriod - 1e-9));
}

std::size_t RacingEnv::observation_size() const
{
  return 2 * static_cast<std::size_t>(config_.lidar.n_beams);
}

std::vector<double> RacingEnv::observe()
{
  const auto s = lidar::scan(map_, state_.x, state_.y, state_.yaw, config_.lidar, noise_rng_);
  prev_scan_ = scan_;
  scan_ = s.beams;
  for (auto & b : scan_) {
    b = std::clamp(b / config_.lidar.max_range, 0.0, 1.0);
  }
  if (prev_scan_.empty()) {
    prev_scan_ = scan_;
  }
  std::vector<double> obs(prev_scan_);
  obs.insert(obs.end(), scan_.begin(), scan_.end());
  return obs;
}

std::vector<double> RacingEnv::reset(std::optional<double> s_start)
{
  double s0 = 0.0;
  if (s_start) {
    s0 = *s_start;
  } else if (config_.random_start) {
    s0 = std::uniform_real_distribution<double>(0.0, centerline_.total_length)(start_rng_);
  }
  s0 = std::fmod(s0, centerline_.total_length);
  if (s0 < 0.0) {
    s0 += centerline_.total_length;
  }
  std::size_t seg = 0;
  const Vec2 p = point_at_arc_length(
    centerline_.points, centerline_.cum_s, centerline_.total_length, true, s0, &seg);
  const Vec2 q = centerline_.points[(seg + 1) % centerline_.size()];
  const Vec2 d = q - centerline_.points[seg];

  state_ = vehicle::VehicleState{};
  state_.x = p.x;
  state_.y = p.y;
  state_.yaw = std::atan2(d.y, d.x);
  state_.speed = config_.vehicle.v_min;
  if (track::collision(map_, state_.x, state_.y, config_.collision_radius)) {
    throw EnvError("start pose at s = " + std::to_string(s0) + " is in collision");
  }
  track_s_ = track::project_pose(centerline_, state_.x, state_.y, state_.yaw, s0).s;
  raceline_s_ = pursuit::classic_command(raceline_, state_, config_.pursuit, config_.vehicle).s;
  lap_.reset(track_s_);
  steps_ = 0;
  done_ = false;
  trace_.clear();
  scan_.clear();
  prev_scan_.clear();
  return observe();
}

vehicle::ControlAction RacingEnv::classic_action() const
{
  return pursuit::classic_command(raceline_, state_, config_.pursuit, config_.vehicle, raceline_s_)
    .action;
}

StepOutcome RacingEnv::step(std::span<const double> normalized_action)
{
  return step_control(scale_action(normalized_action, config_.vehicle));
}

StepOutcome RacingEnv::step_control(const vehicle::ControlAction & action)
{
  if (done_) {
    throw EnvError("step called on a finished episode; call reset first");
  }
  StepOutcome out;
  auto & info = out.info;
  info.agent_action = action;
  const auto classic =
    pursuit::classic_command(raceline_, state_, config_.pursuit, config_.vehicle, raceline_s_);
  info.classic_action = classic.action;
  raceline_s_ = classic.s;

  try {
    state_ = vehicle::advance(state_, action, config_.vehicle);
  } catch (const vehicle::DynamicsError & e) {
    info.crashed = true;
    info.diagnostic = e.what();
  }
  ++steps_;
  info.step = steps_;
  info.lap_time = steps_ * kPlanningPeriod;
  info.state = state_;

  if (info.diagnostic.empty()) {
    try {
      info.projection =
        track::project_pose(centerline_, state_.x, state_.y, state_.yaw, track_s_);
      track_s_ = info.projection.s;
      lap_.update(track_s_);
    } catch (const track::TrackError & e) {
      info.crashed = true;
      info.diagnostic = e.what();
    }
    info.crashed = info.crashed ||
                   track::collision(map_, state_.x, state_.y, config_.collision_radius);
  }
  // A crashed car may sit inside a wall, where no scan exists.
  if (info.crashed) {
    out.observation.assign(observation_size(), 0.0);
  } else {
    out.observation = observe();
  }
  info.lap_complete = !info.crashed && lap_.complete();
  info.progress = info.lap_complete ? 1.0 : lap_.progress();

  if (info.crashed) {
    out.reward = config_.crash_reward;
  } else if (info.lap_complete) {
    out.reward = config_.lap_reward;
  } else if (config_.reward_mode == RewardMode::kTal) {
    out.reward = reward_tal(
      action, info.classic_action, config_.vehicle.v_max, config_.vehicle.steer_max,
      config_.tal_normalized, config_.shaping_scale);
  } else {
    out.reward = reward_baseline(
      state_.speed, info.projection.psi, info.projection.d_c, config_.vehicle.v_max);
  }
  info.truncated = !info.crashed && !info.lap_complete && steps_ >= step_budget_;
  out.done = info.crashed || info.lap_complete || info.truncated;
  done_ = out.done;

  if (record_trace_) {
    trace_.push_back(
      {info.lap_time, state_, info.projection.s, info.projection.d_c, info.projection.psi, action,
       info.classic_action, out.reward});
  }
  return out;
}

}  // namespace tal::env
