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

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tal/geometry.hpp"

namespace tal::track
{

class TrackError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct Pose2
{
  double x{0.0};
  double y{0.0};
  double yaw{0.0};
};

/// Value of the distance field everywhere when the grid has no occupied cell.
inline constexpr double kNoObstacle = std::numeric_limits<double>::infinity();

/// Exact Euclidean distance transform (meters) from every cell center to the
/// nearest occupied cell center. `occupied` is row-major, width * height.
std::vector<double> distance_field(
  std::span<const std::uint8_t> occupied, int width, int height, double resolution);

/// Occupancy grid with its distance field. Cell (ix, iy) has its center at
/// origin + R(yaw) * ((ix + 0.5) * res, (iy + 0.5) * res); iy grows upward,
/// so image row 0 (the top row) becomes iy = height - 1.
class TrackMap
{
public:
  TrackMap(
    int width, int height, double resolution, Pose2 origin, std::vector<std::uint8_t> occupied);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Pose2 & origin() const { return origin_; }

  bool in_bounds(int ix, int iy) const { return ix >= 0 && iy >= 0 && ix < width_ && iy < height_; }
  bool occupied(int ix, int iy) const { return occupied_[index(ix, iy)] != 0; }
  double cell_distance(int ix, int iy) const { return distance_[index(ix, iy)]; }
  std::size_t occupied_count() const;

  /// Continuous cell coordinates of a world point (cell centers at k + 0.5).
  Vec2 world_to_grid(const Vec2 & p) const;
  Vec2 grid_to_world(const Vec2 & g) const;
  Vec2 cell_center(int ix, int iy) const { return grid_to_world({ix + 0.5, iy + 0.5}); }
  /// Cell containing the world point, or nullopt when outside the grid.
  std::optional<std::pair<int, int>> cell_of(const Vec2 & p) const;
  bool occupied_at(const Vec2 & p) const;

  /// Bilinear interpolation of the distance field; 0 outside the grid.
  double distance_at(const Vec2 & p) const;

  std::span<const std::uint8_t> occupancy() const { return occupied_; }
  std::span<const double> distances() const { return distance_; }

private:
  std::size_t index(int ix, int iy) const
  {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(ix);
  }

  int width_;
  int height_;
  double resolution_;
  Pose2 origin_;
  double cos_yaw_;
  double sin_yaw_;
  std::vector<std::uint8_t> occupied_;
  std::vector<double> distance_;
};

struct MapMetadata
{
  std::string image;  // path relative to the metadata file
  double resolution{0.05};
  Pose2 origin{};
  double occupied_thresh{0.45};
};

/// Grayscale image decoded to luminance in [0, 1], row 0 at the top.
struct GrayImage
{
  int width{0};
  int height{0};
  std::vector<double> luminance;
};

/// Decodes binary/ASCII PGM (P5/P2) or PNG bytes.
GrayImage decode_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm(const TrackMap & map);

MapMetadata parse_map_metadata(std::string_view text);
std::string format_map_metadata(const MapMetadata & meta);

/// Pixels with luminance below the threshold become occupied.
TrackMap load_map(std::span<const std::uint8_t> image_bytes, const MapMetadata & meta);
/// Reads the metadata file and the image it names.
TrackMap load_map_file(const std::filesystem::path & metadata_path);
void save_map_files(
  const TrackMap & map, const std::filesystem::path & metadata_path, double occupied_thresh = 0.45);

struct Centerline
{
  std::vector<Vec2> points;
  std::vector<double> width_left;
  std::vector<double> width_right;
  std::vector<double> cum_s;
  double total_length{0.0};
  bool closed{true};

  std::size_t size() const { return points.size(); }
};

/// Validates inputs and fills cum_s / total_length.
Centerline make_centerline(
  std::vector<Vec2> points, std::vector<double> width_left, std::vector<double> width_right,
  bool closed);

struct ExtractOptions
{
  bool closed{true};
  double spacing{0.2};          // output resampling, m
  double trace_step{0.1};       // ridge-following step, m
  double smoothing_window{0.6}; // moving-average half width, m
  double min_loop_length{10.0}; // m
};

/// Traces the distance-field ridge of the free space and returns it as a
/// smoothed, uniformly resampled, counter-clockwise centerline.
Centerline extract_centerline(const TrackMap & map, const ExtractOptions & options = {});

Centerline load_centerline_csv(std::string_view text, bool closed = true);
std::string centerline_to_csv(const Centerline & line);

struct PoseProjection
{
  double s{0.0};
  double d_c{0.0};
  double psi{0.0};
  double progress{0.0};
};

inline constexpr double kMaxProjectionDistance = 5.0;

/// Closest centerline point to (x, y). With a hint the search only looks at
/// segments within 5 m of arc length of it. Throws TrackError when the pose is
/// farther than 5 m from the line.
PoseProjection project_pose(
  const Centerline & line, double x, double y, double yaw,
  std::optional<double> hint_s = std::nullopt);

/// True when the disc of radius `halfwidth` touches an occupied cell center,
/// or the point is outside the grid.
bool collision(const TrackMap & map, double x, double y, double halfwidth);

}  // namespace tal::track
