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

#include <numbers>
#include <stdexcept>
#include <vector>

#include "tal/geometry.hpp"
#include "tal/rng.hpp"
#include "tal/track.hpp"

namespace tal::lidar
{

class LidarError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct LidarConfig
{
  int n_beams{20};
  double fov{std::numbers::pi};
  double max_range{10.0};  // m
  double noise_sigma{0.01};  // m
};

struct LidarScan
{
  std::vector<double> beams;        // m
  std::vector<double> beam_angles;  // rad, relative to the heading
  double fov{0.0};
  double max_range{0.0};
};

/// Beam angles spread over fov with both endpoints included.
std::vector<double> beam_angles(int n_beams, double fov);

/// Distance from `origin` to the boundary of the first occupied cell along
/// the ray (world heading `angle`), or max_range. Leaving the grid is not a hit.
double cast_ray(const track::TrackMap & map, const Vec2 & origin, double angle, double max_range);

/// Casts config.n_beams rays centered on yaw and adds N(0, noise_sigma) to
/// each, clamped to [0, max_range]. No draws are made when noise_sigma is 0.
LidarScan scan(
  const track::TrackMap & map, double x, double y, double yaw, const LidarConfig & config,
  Rng & rng);

}  // namespace tal::lidar
