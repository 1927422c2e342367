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


#include "tal/pursuit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tal::pursuit
{

double PursuitConfig::lookahead(double speed) const
{
  return std::clamp(lookahead_base + lookahead_gain * speed, lookahead_min, lookahead_max);
}

void PursuitConfig::validate() const
{
  if (!(lookahead_min > 0.0 && lookahead_min <= lookahead_max && lookahead_base >= 0.0 &&
        lookahead_gain >= 0.0)) {
    throw std::invalid_argument("pursuit config: need 0 < min <= max and base, gain >= 0");
  }
}

std::size_t upcoming_waypoint(const raceline::RaceTrajectory & traj, double s)
{
  if (traj.size() == 0) {
    throw std::invalid_argument("empty trajectory");
  }
  const auto it = std::upper_bound(traj.cum_s.begin(), traj.cum_s.end(), s);
  if (it == traj.cum_s.end()) {
    return traj.closed ? 0 : traj.size() - 1;
  }
  return static_cast<std::size_t>(it - traj.cum_s.begin());
}

Lookahead find_lookahead(const raceline::RaceTrajectory & traj, double s, double l_d)
{
  if (traj.size() == 0) {
    throw std::invalid_argument("empty trajectory");
  }
  Lookahead out;
  const auto first = std::lower_bound(traj.cum_s.begin(), traj.cum_s.end(), s);
  if (first == traj.cum_s.end()) {
    out.waypoint_index = traj.closed ? 0 : traj.size() - 1;
  } else {
    out.waypoint_index = static_cast<std::size_t>(first - traj.cum_s.begin());
  }
  double target = s + l_d;
  if (traj.closed) {
    target = std::fmod(target, traj.total_length);
    if (target < 0.0) {
      target += traj.total_length;
    }
  }
  out.s = target;
  out.point = point_at_arc_length(traj.points, traj.cum_s, traj.total_length, traj.closed, target);
  return out;
}

double pursuit_steering(
  double x, double y, double yaw, const Vec2 & target, double wheelbase, double steer_max)
{
  const double dx = target.x - x;
  const double dy = target.y - y;
  const double dist = std::hypot(dx, dy);
  if (!(dist > 0.0)) {
    throw std::invalid_argument("pursuit_steering: lookahead point coincides with the pose");
  }
  const double lateral = -std::sin(yaw) * dx + std::cos(yaw) * dy;
  // sin(alpha) = lateral / dist
  const double steer = std::atan(2.0 * wheelbase * (lateral / dist) / dist);
  return std::clamp(steer, -steer_max, steer_max);
}

ClassicCommand classic_command(
  const raceline::RaceTrajectory & traj, const vehicle::VehicleState & state,
  const PursuitConfig & config, const vehicle::VehicleParams & params,
  std::optional<double> hint_s)
{
  const auto proj = project_onto_polyline(
    traj.points, traj.cum_s, traj.total_length, traj.closed, {state.x, state.y}, hint_s);
  ClassicCommand out;
  out.s = proj.s;
  out.lookahead = find_lookahead(traj, proj.s, config.lookahead(state.speed));
  out.action.steer_ref = pursuit_steering(
    state.x, state.y, state.yaw, out.lookahead.point, params.wheelbase(), params.steer_max);
  out.action.speed_ref =
    std::clamp(traj.v_ref[upcoming_waypoint(traj, proj.s)], params.v_min, params.v_max);
  return out;
}

}  // namespace tal::pursuit
