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

#include "tal/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tal::fixtures
{
namespace
{

constexpr double kPi = std::numbers::pi;

double loop_length(std::span<const Vec2> pts)
{
  double closing = 0.0;
  const auto cum = cumulative_length(pts, true, &closing);
  return cum.back() + closing;
}

struct Corner
{
  Vec2 at;
  double radius;  // m, after scaling
};

// Polygon whose vertices are rounded by tangent arcs. The polygon is scaled
// so the loop has the requested length; the radii are not scaled. Starts at
// the end of the first corner's arc.
std::vector<Vec2> filleted_loop(std::span<const Corner> corners, double length, double spacing)
{
  const std::size_t n = corners.size();
  std::vector<Vec2> dir(n);  // edge i runs from corner i to i + 1
  double perimeter = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = corners[(i + 1) % n].at - corners[i].at;
    perimeter += norm(e);
    dir[i] = e * (1.0 / norm(e));
  }
  std::vector<double> turn(n);
  std::vector<double> tangent(n);
  double shortening = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 in = dir[(i + n - 1) % n];
    turn[i] = std::atan2(cross(in, dir[i]), dot(in, dir[i]));
    tangent[i] = corners[i].radius * std::tan(std::abs(turn[i]) / 2.0);
    shortening += 2.0 * tangent[i] - corners[i].radius * std::abs(turn[i]);
  }
  const double scale = (length + shortening) / perimeter;
  for (std::size_t i = 0; i < n; ++i) {
    const double edge = norm(corners[(i + 1) % n].at - corners[i].at) * scale;
    if (tangent[i] + tangent[(i + 1) % n] > edge) {
      throw std::logic_error("filleted_loop: corner arcs overlap");
    }
  }

  std::vector<Vec2> pts;
  auto emit_segment = [&](Vec2 a, Vec2 b) {
    const int m = std::max(1, static_cast<int>(std::ceil(norm(b - a) / spacing)));
    for (int k = 0; k < m; ++k) {
      pts.push_back(a + (b - a) * (static_cast<double>(k) / m));
    }
  };
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = j % n;
    const std::size_t prev = j - 1;
    const Vec2 from = corners[prev].at * scale + dir[prev] * tangent[prev];
    const Vec2 to = corners[i].at * scale - dir[prev] * tangent[i];
    emit_segment(from, to);
    const double sign = turn[i] > 0.0 ? 1.0 : -1.0;
    const Vec2 center = to + left_normal(dir[prev]) * (sign * corners[i].radius);
    const Vec2 r0 = to - center;
    const double a0 = std::atan2(r0.y, r0.x);
    const double arc = corners[i].radius * std::abs(turn[i]);
    const int m = std::max(1, static_cast<int>(std::ceil(arc / spacing)));
    for (int k = 0; k < m; ++k) {
      const double a = a0 + turn[i] * k / m;
      pts.push_back(center + Vec2{std::cos(a), std::sin(a)} * corners[i].radius);
    }
  }
  // Chords make the sampled loop slightly shorter than the arcs.
  const double stretch = length / loop_length(pts);
  for (auto & p : pts) {
    p = p * stretch;
  }
  return pts;
}


}  // namespace

track::TrackMap rasterize_closed_track(
  std::span<const Vec2> line, double half_width, double resolution, double border)
{
  if (line.size() < 3) {
    throw std::invalid_argument("rasterize_closed_track: need a loop");
  }
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  for (const auto & p : line) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  const double pad = half_width + border;
  const track::Pose2 origin{min_x - pad, min_y - pad, 0.0};
  const int width = static_cast<int>(std::ceil((max_x - min_x + 2.0 * pad) / resolution));
  const int height = static_cast<int>(std::ceil((max_y - min_y + 2.0 * pad) / resolution));

  // Seed the cells along the line, then threshold their distance field.
  std::vector<std::uint8_t> seeds(static_cast<std::size_t>(width) * height, 0);
  const double step = resolution / 4.0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const Vec2 a = line[i];
    const Vec2 b = line[(i + 1) % line.size()];
    const int n = std::max(1, static_cast<int>(std::ceil(norm(b - a) / step)));
    for (int k = 0; k < n; ++k) {
      const Vec2 p = a + (b - a) * (static_cast<double>(k) / n);
      const int ix = static_cast<int>(std::floor((p.x - origin.x) / resolution));
      const int iy = static_cast<int>(std::floor((p.y - origin.y) / resolution));
      seeds[static_cast<std::size_t>(iy) * width + ix] = 1;
    }
  }
  const auto dist = track::distance_field(seeds, width, height, resolution);
  std::vector<std::uint8_t> occupied(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    occupied[i] = dist[i] <= half_width ? 0 : 1;
  }
  return track::TrackMap(width, height, resolution, origin, std::move(occupied));
}

Fixture annulus(double inner_radius, double outer_radius, double resolution)
{
  if (!(inner_radius > 0.0 && outer_radius > inner_radius)) {
    throw std::invalid_argument("annulus: need 0 < inner < outer");
  }
  const double extent = outer_radius + 1.0;
  const int cells = static_cast<int>(std::ceil(2.0 * extent / resolution));
  const track::Pose2 origin{-cells * resolution / 2.0, -cells * resolution / 2.0, 0.0};
  std::vector<std::uint8_t> occupied(static_cast<std::size_t>(cells) * cells);
  for (int iy = 0; iy < cells; ++iy) {
    for (int ix = 0; ix < cells; ++ix) {
      const double x = origin.x + (ix + 0.5) * resolution;
      const double y = origin.y + (iy + 0.5) * resolution;
      const double r = std::hypot(x, y);
      occupied[static_cast<std::size_t>(iy) * cells + ix] =
        (r >= inner_radius && r <= outer_radius) ? 0 : 1;
    }
  }
  const double mid = 0.5 * (inner_radius + outer_radius);
  std::vector<Vec2> design(720);
  for (std::size_t i = 0; i < design.size(); ++i) {
    const double th = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(design.size());
    design[i] = {mid * std::cos(th), mid * std::sin(th)};
  }
  return {"annulus", track::TrackMap(cells, cells, resolution, origin, std::move(occupied)),
          design, 2.0 * kPi * mid, outer_radius - inner_radius};
}

Fixture rounded_rectangle(
  double length, double height, double corner_radius, double width, double resolution)
{
  if (!(corner_radius > 0.0 && 2.0 * corner_radius <= std::min(length, height))) {
    throw std::invalid_argument("rounded_rectangle: corner radius does not fit");
  }
  const double hx = length / 2.0 - corner_radius;
  const double hy = height / 2.0 - corner_radius;
  std::vector<Vec2> line;
  const double ds = 0.02;
  auto straight = [&](Vec2 a, Vec2 b) {
    const int n = std::max(1, static_cast<int>(std::ceil(norm(b - a) / ds)));
    for (int k = 0; k < n; ++k) {
      line.push_back(a + (b - a) * (static_cast<double>(k) / n));
    }
  };
  auto arc = [&](Vec2 c, double from) {
    const int n = std::max(2, static_cast<int>(std::ceil(corner_radius * kPi / 2.0 / ds)));
    for (int k = 0; k < n; ++k) {
      const double th = from + (kPi / 2.0) * k / n;
      line.push_back(c + unit(th) * corner_radius);
    }
  };
  // Counter-clockwise, starting mid-way along the bottom straight.
  straight({0.0, -height / 2.0}, {hx, -height / 2.0});
  arc({hx, -hy}, -kPi / 2.0);
  straight({length / 2.0, -hy}, {length / 2.0, hy});
  arc({hx, hy}, 0.0);
  straight({hx, height / 2.0}, {-hx, height / 2.0});
  arc({-hx, hy}, kPi / 2.0);
  straight({-length / 2.0, hy}, {-length / 2.0, -hy});
  arc({-hx, -hy}, kPi);
  straight({-hx, -height / 2.0}, {0.0, -height / 2.0});
  const double len = loop_length(line);
  return {"rounded_rect", rasterize_closed_track(line, width / 2.0, resolution), std::move(line),
          len, width};
}

Fixture aut_like(double resolution)
{
  // A hairpin at the end of the main straight, a second one back, then
  // faster bends home.
  constexpr Corner kShape[] = {{{0.0, 0.0}, 3.0},   {{36.0, 0.0}, 2.0}, {{22.0, 10.0}, 2.5},
                               {{34.0, 18.0}, 2.0}, {{8.0, 20.0}, 4.0}, {{-4.0, 10.0}, 3.0}};
  auto line = filleted_loop(kShape, 93.7, 0.02);
  const double width = 2.0;
  return {"aut", rasterize_closed_track(line, width / 2.0, resolution), line, loop_length(line),
          width};
}

Fixture esp_like(double resolution)
{
  constexpr Corner kShape[] = {
    {{0.0, 0.0}, 3.0},   {{64.0, 0.0}, 2.0},  {{46.0, 10.0}, 3.0}, {{50.0, 22.0}, 2.5},
    {{30.0, 28.0}, 3.0}, {{20.0, 16.0}, 2.5}, {{6.0, 26.0}, 4.0},  {{-8.0, 20.0}, 2.5}};
  auto line = filleted_loop(kShape, 236.8, 0.02);
  const double width = 2.2;
  return {"esp", rasterize_closed_track(line, width / 2.0, resolution), line, loop_length(line),
          width};
}

track::TrackMap corridor(double length, double width, double resolution)
{
  const double border = 0.5;
  const int cols = static_cast<int>(std::ceil(length / resolution));
  const int rows = static_cast<int>(std::ceil((width + 2.0 * border) / resolution));
  const track::Pose2 origin{0.0, -rows * resolution / 2.0, 0.0};
  std::vector<std::uint8_t> occupied(static_cast<std::size_t>(cols) * rows);
  for (int iy = 0; iy < rows; ++iy) {
    const double y = origin.y + (iy + 0.5) * resolution;
    const std::uint8_t wall = std::abs(y) > width / 2.0 ? 1 : 0;
    std::fill_n(occupied.begin() + static_cast<std::ptrdiff_t>(iy) * cols, cols, wall);
  }
  return track::TrackMap(cols, rows, resolution, origin, std::move(occupied));
}

Fixture by_name(std::string_view name)
{
  if (name == "annulus") {
    return annulus(9.0, 10.5);
  }
  if (name == "rounded_rect") {
    return rounded_rectangle();
  }
  if (name == "stadium") {
    auto f = rounded_rectangle(30.0, 5.0, 2.5, 1.8);
    f.name = "stadium";
    return f;
  }
  if (name == "aut") {
    return aut_like();
  }
  if (name == "esp") {
    return esp_like();
  }
  throw std::invalid_argument("unknown fixture map: " + std::string(name));
}

std::vector<std::string> names() { return {"annulus", "rounded_rect", "stadium", "aut", "esp"}; }

}  // namespace tal::fixtures
