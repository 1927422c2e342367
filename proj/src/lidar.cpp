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


#include "tal/lidar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tal::lidar
{

std::vector<double> beam_angles(int n_beams, double fov)
{
  if (n_beams < 2) {
    throw LidarError("scan needs at least two beams");
  }
  std::vector<double> angles(static_cast<std::size_t>(n_beams));
  const double spacing = fov / (n_beams - 1);
  for (int i = 0; i < n_beams; ++i) {
    angles[static_cast<std::size_t>(i)] = -fov / 2.0 + spacing * i;
  }
  return angles;
}

double cast_ray(const track::TrackMap & map, const Vec2 & origin, double angle, double max_range)
{
  const Vec2 g = map.world_to_grid(origin);
  int ix = static_cast<int>(std::floor(g.x));
  int iy = static_cast<int>(std::floor(g.y));
  if (map.in_bounds(ix, iy) && map.occupied(ix, iy)) {
    throw LidarError("ray origin lies inside an occupied cell");
  }
  const double res = map.resolution();
  const double limit = max_range / res;  // in cells
  const double dx = std::cos(angle - map.origin().yaw);
  const double dy = std::sin(angle - map.origin().yaw);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Amanatides-Woo traversal in cell units.
  const int step_x = dx > 0.0 ? 1 : -1;
  const int step_y = dy > 0.0 ? 1 : -1;
  const double delta_x = dx != 0.0 ? std::abs(1.0 / dx) : kInf;
  const double delta_y = dy != 0.0 ? std::abs(1.0 / dy) : kInf;
  double next_x = dx != 0.0 ? ((dx > 0.0 ? (ix + 1.0 - g.x) : (g.x - ix)) * delta_x) : kInf;
  double next_y = dy != 0.0 ? ((dy > 0.0 ? (iy + 1.0 - g.y) : (g.y - iy)) * delta_y) : kInf;

  while (true) {
    double t = 0.0;
    if (next_x < next_y) {
      t = next_x;
      next_x += delta_x;
      ix += step_x;
    } else {
      t = next_y;
      next_y += delta_y;
      iy += step_y;
    }
    if (t >= limit) {
      return max_range;
    }
    if (!map.in_bounds(ix, iy)) {
      // Rays only re-enter a convex grid if they started outside it.
      const bool heading_away = (ix < 0 && step_x < 0) || (ix >= map.width() && step_x > 0) ||
                                (iy < 0 && step_y < 0) || (iy >= map.height() && step_y > 0);
      if (heading_away) {
        return max_range;
      }
      continue;
    }
    if (map.occupied(ix, iy)) {
      return t * res;
    }
  }
}

LidarScan scan(
  const track::TrackMap & map, double x, double y, double yaw, const LidarConfig & config,
  Rng & rng)
{
  LidarScan out;
  out.fov = config.fov;
  out.max_range = config.max_range;
  out.beam_angles = beam_angles(config.n_beams, config.fov);
  out.beams.resize(out.beam_angles.size());
  std::normal_distribution<double> noise(0.0, config.noise_sigma > 0.0 ? config.noise_sigma : 1.0);
  for (std::size_t i = 0; i < out.beams.size(); ++i) {
    double d = cast_ray(map, {x, y}, yaw + out.beam_angles[i], config.max_range);
    if (config.noise_sigma > 0.0) {
      d += noise(rng);
    }
    out.beams[i] = std::clamp(d, 0.0, config.max_range);
  }
  return out;
}

}  // namespace tal::lidar
