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


#include "tal/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tal/geometry.hpp"

namespace tal::vehicle
{
namespace
{

VehicleState finish(VehicleState s, const VehicleParams & p)
{
  s.steer = std::clamp(s.steer, -p.steer_max, p.steer_max);
  s.speed = std::max(0.0, s.speed);
  s.yaw = wrap_angle(s.yaw);
  if (!(std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.steer) &&
        std::isfinite(s.speed) && std::isfinite(s.yaw) && std::isfinite(s.yaw_rate) &&
        std::isfinite(s.slip))) {
    throw DynamicsError(
      "non-finite vehicle state (v=" + std::to_string(s.speed) +
      ", yaw_rate=" + std::to_string(s.yaw_rate) + ", slip=" + std::to_string(s.slip) + ")");
  }
  return s;
}

}  // namespace

void VehicleParams::validate() const
{
  const double positive[] = {mass,     lf,    lr,        h_cg,      c_sf,      c_sr,  mu,
                             i_z,      steer_max, steer_rate_max, a_max, v_max, speed_gain,
                             gravity};
  for (double v : positive) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("vehicle parameters must be positive and finite");
    }
  }
  if (!(v_min >= 0.0 && v_min < v_max)) {
    throw std::invalid_argument("vehicle parameters need 0 <= v_min < v_max");
  }
  if (!(v_switch >= 0.0)) {
    throw std::invalid_argument("vehicle parameters need v_switch >= 0");
  }
}

ActuatorInputs actuator_inputs(
  const VehicleState & state, const ControlAction & action, const VehicleParams & params)
{
  const double steer_rate = std::clamp(
    (action.steer_ref - state.steer) / kSubstepDt, -params.steer_rate_max, params.steer_rate_max);
  const double accel =
    std::clamp(params.speed_gain * (action.speed_ref - state.speed), -params.a_max, params.a_max);
  return {steer_rate, accel};
}

VehicleState step_single_track(
  const VehicleState & s, double steer_rate, double accel, const VehicleParams & p, double dt)
{
  const double g = p.gravity;
  const double l = p.wheelbase();
  const double front = p.c_sf * (g * p.lr - accel * p.h_cg);
  const double rear = p.c_sr * (g * p.lf + accel * p.h_cg);
  const double v = s.speed;

  const double yaw_acc =
    -p.mu * p.mass / (v * p.i_z * l) * (p.lf * p.lf * front + p.lr * p.lr * rear) * s.yaw_rate +
    p.mu * p.mass / (p.i_z * l) * (p.lr * rear - p.lf * front) * s.slip +
    p.mu * p.mass / (p.i_z * l) * p.lf * front * s.steer;
  const double slip_rate =
    (p.mu / (v * v * l) * (rear * p.lr - front * p.lf) - 1.0) * s.yaw_rate -
    p.mu / (v * l) * (rear + front) * s.slip + p.mu / (v * l) * front * s.steer;

  VehicleState n = s;
  n.x += dt * v * std::cos(s.yaw + s.slip);
  n.y += dt * v * std::sin(s.yaw + s.slip);
  n.steer += dt * steer_rate;
  n.speed += dt * accel;
  n.yaw += dt * s.yaw_rate;
  n.yaw_rate += dt * yaw_acc;
  n.slip += dt * slip_rate;
  return finish(n, p);
}

VehicleState step_kinematic(
  const VehicleState & s, double steer_rate, double accel, const VehicleParams & p, double dt)
{
  const double l = p.wheelbase();
  VehicleState n = s;
  n.x += dt * s.speed * std::cos(s.yaw);
  n.y += dt * s.speed * std::sin(s.yaw);
  n.yaw += dt * s.speed * std::tan(s.steer) / l;
  n.steer += dt * steer_rate;
  n.speed += dt * accel;
  n.slip = 0.0;
  n = finish(n, p);
  n.yaw_rate = n.speed * std::tan(n.steer) / l;
  return n;
}

VehicleState advance(
  const VehicleState & state, const ControlAction & action, const VehicleParams & params,
  int n_substeps)
{
  VehicleState s = state;
  for (int i = 0; i < n_substeps; ++i) {
    const auto in = actuator_inputs(s, action, params);
    s = s.speed > params.v_switch
          ? step_single_track(s, in.steer_rate, in.accel, params, kSubstepDt)
          : step_kinematic(s, in.steer_rate, in.accel, params, kSubstepDt);
  }
  return s;
}

}  // namespace tal::vehicle
