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

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tal/geometry.hpp"
#include "tal/track.hpp"

namespace tal::raceline
{

class RacelineError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct RaceTrajectory
{
  std::vector<Vec2> points;
  std::vector<double> heading;    // rad
  std::vector<double> curvature;  // 1/m, positive when turning left
  std::vector<double> v_ref;      // m/s
  std::vector<double> cum_s;      // m
  double total_length{0.0};       // includes the closing segment when closed
  bool closed{true};

  std::size_t size() const { return points.size(); }
};

struct SpeedLimits
{
  double mu{1.0489};
  double gravity{9.81};
  double a_max{9.51};
  double v_max{6.0};
  double v_min{1.0};
};

struct RacelineParams
{
  // Footprint used for the bounds: the 0.31 m body plus an allowance for
  // pure pursuit tracking error under launch understeer.
  double vehicle_width{1.0};
  double margin{0.1};
  double spacing{0.1};  // resampling before the speed profile, m
  int max_iterations{5};
  double tolerance{1e-3};  // m, on max |delta alpha|
  SpeedLimits limits{};
};

/// Signed circumscribed-circle curvature of every point through its neighbours
/// `stride` samples away. Open polylines shrink the stride near the ends and
/// copy the neighbouring value to their two end points.
std::vector<double> path_curvature(
  std::span<const Vec2> points, bool closed, std::size_t stride = 1);

/// Sum of squared curvature over the points that have two neighbours.
double curvature_objective(std::span<const Vec2> points, bool closed);

struct MinCurvatureResult
{
  std::vector<double> alpha;       // offset along the left normal, m
  std::vector<double> objective;   // sum of kappa^2, before and after each iteration
  std::vector<Vec2> path;
  int iterations{0};
  bool converged{false};
};

/// Unit left normals of the centerline, from central differences.
std::vector<Vec2> centerline_normals(const track::Centerline & line);

/// Minimizes the summed squared curvature of centerline + alpha * normal
/// within the track bounds, re-linearizing around the current path until
/// max |delta alpha| < tolerance or max_iterations is reached.
MinCurvatureResult min_curvature_path(
  const track::Centerline & line, double vehicle_width, double margin, int max_iterations = 5,
  double tolerance = 1e-3);

/// Friction-circle limited forward/backward speed profile.
std::vector<double> speed_profile(
  std::span<const double> curvature, std::span<const double> cum_s, double total_length,
  bool closed, const SpeedLimits & limits);

/// Builds a trajectory from path points: heading, curvature (over ~1 m
/// chords), cum_s, v_ref.
RaceTrajectory make_trajectory(std::vector<Vec2> points, bool closed, const SpeedLimits & limits);

RaceTrajectory generate_raceline(const track::Centerline & line, const RacelineParams & params);

/// Time to drive the trajectory at v_ref under constant acceleration between
/// waypoints.
double predicted_lap_time(const RaceTrajectory & traj);

/// Violations of the trajectory invariants, empty when all hold.
std::vector<std::string> check_trajectory(
  const RaceTrajectory & traj, const SpeedLimits & limits, double tolerance = 0.05);

std::string raceline_to_csv(const RaceTrajectory & traj);
RaceTrajectory load_raceline_csv(std::string_view text, bool closed = true);

}  // namespace tal::raceline
