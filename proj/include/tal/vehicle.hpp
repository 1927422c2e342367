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

#include <stdexcept>

namespace tal::vehicle
{

/// Thrown when an integration step produces a non-finite state.
class DynamicsError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct VehicleState
{
  double x{0.0};         // m
  double y{0.0};         // m
  double steer{0.0};     // rad
  double speed{0.0};     // m/s
  double yaw{0.0};       // rad, wrapped to (-pi, pi]
  double yaw_rate{0.0};  // rad/s
  double slip{0.0};      // rad

  bool operator==(const VehicleState &) const = default;
};

// F1TENTH-scale defaults.
struct VehicleParams
{
  double mass{3.74};
  double lf{0.15875};
  double lr{0.17145};
  double h_cg{0.074};
  double c_sf{4.718};
  double c_sr{5.4562};
  double mu{1.0489};
  double i_z{0.04712};
  double steer_max{0.4189};
  double steer_rate_max{3.2};
  double a_max{9.51};
  double v_max{6.0};
  double v_min{1.0};
  double v_switch{0.5};  // below this speed the kinematic model is used
  double speed_gain{10.0};
  double gravity{9.81};

  double wheelbase() const { return lf + lr; }
  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct ControlAction
{
  double steer_ref{0.0};  // rad
  double speed_ref{0.0};  // m/s
};

struct ActuatorInputs
{
  double steer_rate{0.0};  // rad/s
  double accel{0.0};       // m/s^2
};

inline constexpr double kSubstepDt = 0.01;
inline constexpr int kSubstepsPerPlan = 10;

ActuatorInputs actuator_inputs(
  const VehicleState & state, const ControlAction & action, const VehicleParams & params);

/// One explicit Euler step of the linear-tire single-track model.
VehicleState step_single_track(
  const VehicleState & state, double steer_rate, double accel, const VehicleParams & params,
  double dt);

/// One explicit Euler step of the kinematic bicycle (slip-free).
VehicleState step_kinematic(
  const VehicleState & state, double steer_rate, double accel, const VehicleParams & params,
  double dt);

/// Applies the actuator law and the model matching the current speed,
/// `n_substeps` times at kSubstepDt.
VehicleState advance(
  const VehicleState & state, const ControlAction & action, const VehicleParams & params,
  int n_substeps = kSubstepsPerPlan);

}  // namespace tal::vehicle
