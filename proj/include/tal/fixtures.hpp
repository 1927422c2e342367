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
#include <string>
#include <string_view>
#include <vector>

#include "tal/geometry.hpp"
#include "tal/track.hpp"

// Procedurally generated race maps, so nothing depends on downloaded assets.
namespace tal::fixtures
{

struct Fixture
{
  std::string name;
  track::TrackMap map;
  std::vector<Vec2> design_line;  // generating centerline, counter-clockwise
  double design_length;           // m
  double track_width;             // m, wall to wall
};

/// Occupancy grid whose free space is every cell within half_width of the
/// closed polyline `line`; everything else is wall.
track::TrackMap rasterize_closed_track(
  std::span<const Vec2> line, double half_width, double resolution, double border = 1.0);

/// Ring between two concentric circles centered on the world origin.
Fixture annulus(double inner_radius, double outer_radius, double resolution = 0.05);
/// Stadium-like loop: straight sides joined by quarter circles.
Fixture rounded_rectangle(
  double length = 24.0, double height = 12.0, double corner_radius = 3.0, double width = 1.8,
  double resolution = 0.05);
/// 93.7 m loop of straights and 2-4 m radius corners with two hairpins, 2.0 m wide.
Fixture aut_like(double resolution = 0.05);
/// 236.8 m loop of straights and 2-4 m radius corners with one hairpin, 2.2 m wide.
Fixture esp_like(double resolution = 0.05);
/// Open straight corridor along +x, walls at y = +-width/2.
track::TrackMap corridor(double length, double width, double resolution = 0.05);

/// annulus | rounded_rect | stadium | aut | esp
/// stadium: 30 x 5 m loop with 2.5 m radius hairpins, speed-limited at 8 m/s.
Fixture by_name(std::string_view name);
std::vector<std::string> names();

}  // namespace tal::fixtures
