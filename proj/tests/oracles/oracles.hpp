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

// Independent reference computations used by the unit and acceptance tests.
// None of them call the library code they check.

#include <cstddef>
#include <span>
#include <vector>

#include "tal/geometry.hpp"
#include "tal/nn.hpp"
#include "tal/raceline.hpp"
#include "tal/rng.hpp"
#include "tal/td3.hpp"
#include "tal/track.hpp"

namespace tal::oracle
{

// ---- neural -----------------------------------------------------------------

/// Largest relative error between analytic and central-difference gradients
/// of L = out_grad . net(input), over every parameter. The relative error of
/// a pair (a, n) is |a - n| / max(|a|, |n|, floor).
struct GradCheck
{
  double max_rel_error{0.0};
  std::size_t params_checked{0};
};
GradCheck gradient_check(
  const nn::Mlp & net, std::span<const double> input, std::span<const double> out_grad,
  double h = 1e-6, double floor = 1e-3);

/// Input whose hidden pre-activations all stay at least `margin` from the
/// ReLU kink, so finite differences never straddle it.
std::vector<double> kink_free_input(const nn::Mlp & net, Rng & rng, double margin = 1e-3);

/// Plain nested-vector network with hand-written backprop.
struct RefNet
{
  std::vector<std::vector<std::vector<double>>> w;  // [layer][out][in]
  std::vector<std::vector<double>> b;               // [layer][out]
  bool tanh_out{false};

  static RefNet from(const nn::Mlp & net);
  std::vector<double> forward(const std::vector<double> & x) const;
  /// Gradients of out_grad . f(x): parameter grads in RefNet shape, input grad.
  void backward(
    const std::vector<double> & x, const std::vector<double> & out_grad, RefNet & param_grad,
    std::vector<double> & input_grad) const;
  RefNet zeros_like() const;
  std::vector<double> flat() const;  // Mlp parameter order
};

struct RefAdam
{
  RefNet m;
  RefNet v;
  long t{0};
  double lr{1e-3};
};

void ref_adam(RefNet & p, const RefNet & g, RefAdam & s);
void ref_soft_update(RefNet & target, const RefNet & model, double tau);

/// Scripted TD3: one update per call on a fixed batch with frozen smoothing
/// noise, written out step by step.
struct RefTd3
{
  RefNet actor, actor_t, q1, q2, q1_t, q2_t;
  RefAdam actor_adam, q1_adam, q2_adam;
  td3::Td3Config config;
  long calls{0};

  static RefTd3 from(const td3::Td3Agent & agent);
  void update(const td3::Batch & batch, const std::vector<double> & noise);
};

// ---- lidar ------------------------------------------------------------------

/// Marches along the ray in steps of `step` until the sample point lands in
/// an occupied cell, leaves the grid or passes max_range.
double march_ray(
  const track::TrackMap & map, const Vec2 & origin, double angle, double max_range, double step);

/// Grid of random size and resolution sprinkled with wall blocks, plus a
/// free origin inside it.
struct RayCase
{
  track::TrackMap map;
  Vec2 origin;
  double angle;
};
RayCase random_ray_case(Rng & rng);

// ---- raceline ---------------------------------------------------------------

/// Highest speed at each point over all discretized speed sequences that
/// respect the lateral cap and the friction-circle acceleration/braking
/// limits between neighbours (open path, free end speeds). Constraints are
/// relaxed by (v_i + v_j) dv / 2 in v^2, the mean loss from rounding down
/// to the grid.
std::vector<double> speed_profile_dp(
  std::span<const double> curvature, std::span<const double> cum_s,
  const raceline::SpeedLimits & limits, double dv = 0.01);

/// Circumscribed-circle curvature, computed independently.
double menger_curvature(const Vec2 & a, const Vec2 & b, const Vec2 & c);
/// Sum of squared curvature over interior points of an open polyline.
double open_curvature_objective(std::span<const Vec2> pts);

struct OffsetSearch
{
  std::vector<double> alpha;
  double objective{0.0};
};

/// Coordinate-wise exhaustive grid search over per-point lateral offsets
/// (step 0.02 m across the full bound), repeated until no point improves, then
/// refined locally with finer steps. Open centerline only.
OffsetSearch exhaustive_offset_search(
  const track::Centerline & line, double vehicle_width, double margin);

/// An open 90 degree corner: straight, quarter circle, straight.
track::Centerline corner_fixture(double radius, double half_width, double spacing);

}  // namespace tal::oracle
