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
#include <optional>

#include "tal/geometry.hpp"
#include "tal/raceline.hpp"
#include "tal/vehicle.hpp"

namespace tal::pursuit
{

struct PursuitConfig
{
  double lookahead_base{0.3};  // m
  double lookahead_gain{0.15}; // s
  double lookahead_min{1.0};   // m
  double lookahead_max{2.5};   // m

  double lookahead(double speed) const;
  void validate() const;
};

struct Lookahead
{
  Vec2 point;
  std::size_t waypoint_index{0};  // first waypoint at or beyond the projected s
  double s{0.0};                  // arc length of `point`
};

/// Point l_d ahead of arc length s along the trajectory.
Lookahead find_lookahead(const raceline::RaceTrajectory & traj, double s, double l_d);

/// Classic pure pursuit law, clamped to +-steer_max.
double pursuit_steering(
  double x, double y, double yaw, const Vec2 & target, double wheelbase, double steer_max);

/// Index of the first waypoint strictly ahead of s (wrapping when closed).
std::size_t upcoming_waypoint(const raceline::RaceTrajectory & traj, double s);

struct ClassicCommand
{
  vehicle::ControlAction action;
  double s{0.0};  // projection of the vehicle onto the trajectory
  Lookahead lookahead;
};

ClassicCommand classic_command(
  const raceline::RaceTrajectory & traj, const vehicle::VehicleState & state,
  const PursuitConfig & config, const vehicle::VehicleParams & params,
  std::optional<double> hint_s = std::nullopt);

inline vehicle::ControlAction classic_action(
  const raceline::RaceTrajectory & traj, const vehicle::VehicleState & state,
  const PursuitConfig & config, const vehicle::VehicleParams & params)
{
  return classic_command(traj, state, config, params).action;
}

}  // namespace tal::pursuit
