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

#include "tal/track.hpp"

#include <png.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <queue>
#include <sstream>

#include "tal/csv.hpp"

namespace tal::track
{

// ---------------------------------------------------------------------------
// Distance transform (Felzenszwalb & Huttenlocher lower envelope, two passes)
// ---------------------------------------------------------------------------

namespace
{

constexpr double kFar = 1e20;

// In-place 1D squared-distance transform of `f` (length n).
void edt_1d(std::vector<double> & f, std::size_t n, std::vector<double> & out,
            std::vector<std::size_t> & v, std::vector<double> & z)
{
  std::size_t k = 0;
  v[0] = 0;
  z[0] = -kFar;
  z[1] = kFar;
  for (std::size_t q = 1; q < n; ++q) {
    const double fq = f[q] + static_cast<double>(q * q);
    double s = 0.0;
    while (true) {
      const auto vk = static_cast<double>(v[k]);
      s = (fq - (f[v[k]] + vk * vk)) / (2.0 * static_cast<double>(q) - 2.0 * vk);
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates everywhere.
      v[0] = q;
      z[0] = -kFar;
      z[1] = kFar;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) {
      ++k;
    }
    const double dq = static_cast<double>(q) - static_cast<double>(v[k]);
    out[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<double> distance_field(
  std::span<const std::uint8_t> occupied, int width, int height, double resolution)
{
  if (width <= 0 || height <= 0 || occupied.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("distance_field: grid size mismatch");
  }
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("distance_field: resolution must be positive");
  }
  const auto w = static_cast<std::size_t>(width);
  const auto h = static_cast<std::size_t>(height);
  if (std::none_of(occupied.begin(), occupied.end(), [](std::uint8_t c) { return c != 0; })) {
    return std::vector<double>(w * h, kNoObstacle);
  }
  std::vector<double> sq(w * h);
  for (std::size_t i = 0; i < sq.size(); ++i) {
    sq[i] = occupied[i] ? 0.0 : kFar;
  }
  const std::size_t longest = std::max(w, h);
  std::vector<double> f(longest);
  std::vector<double> out(longest);
  std::vector<std::size_t> v(longest);
  std::vector<double> z(longest + 1);
  // Columns.
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) {
      f[y] = sq[y * w + x];
    }
    edt_1d(f, h, out, v, z);
    for (std::size_t y = 0; y < h; ++y) {
      sq[y * w + x] = out[y];
    }
  }
  // Rows.
  for (std::size_t y = 0; y < h; ++y) {
    std::copy_n(sq.begin() + static_cast<std::ptrdiff_t>(y * w), w, f.begin());
    edt_1d(f, w, out, v, z);
    for (std::size_t x = 0; x < w; ++x) {
      sq[y * w + x] = std::sqrt(out[x]) * resolution;
    }
  }
  return sq;
}

// ---------------------------------------------------------------------------
// TrackMap
// ---------------------------------------------------------------------------

TrackMap::TrackMap(
  int width, int height, double resolution, Pose2 origin, std::vector<std::uint8_t> occupied)
: width_(width),
  height_(height),
  resolution_(resolution),
  origin_(origin),
  cos_yaw_(std::cos(origin.yaw)),
  sin_yaw_(std::sin(origin.yaw)),
  occupied_(std::move(occupied))
{
  if (!(resolution_ > 0.0) || !std::isfinite(resolution_)) {
    throw std::invalid_argument("TrackMap: resolution must be positive");
  }
  if (width_ <= 0 || height_ <= 0 ||
      occupied_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
    throw std::invalid_argument("TrackMap: grid size mismatch");
  }
  distance_ = distance_field(occupied_, width_, height_, resolution_);
}

std::size_t TrackMap::occupied_count() const
{
  return static_cast<std::size_t>(
    std::count_if(occupied_.begin(), occupied_.end(), [](std::uint8_t c) { return c != 0; }));
}

Vec2 TrackMap::world_to_grid(const Vec2 & p) const
{
  const double dx = p.x - origin_.x;
  const double dy = p.y - origin_.y;
  return {(cos_yaw_ * dx + sin_yaw_ * dy) / resolution_,
          (-sin_yaw_ * dx + cos_yaw_ * dy) / resolution_};
}

Vec2 TrackMap::grid_to_world(const Vec2 & g) const
{
  const double gx = g.x * resolution_;
  const double gy = g.y * resolution_;
  return {origin_.x + cos_yaw_ * gx - sin_yaw_ * gy, origin_.y + sin_yaw_ * gx + cos_yaw_ * gy};
}

std::optional<std::pair<int, int>> TrackMap::cell_of(const Vec2 & p) const
{
  const Vec2 g = world_to_grid(p);
  const double fx = std::floor(g.x);
  const double fy = std::floor(g.y);
  if (fx < 0.0 || fy < 0.0 || fx >= width_ || fy >= height_) {
    return std::nullopt;
  }
  return std::make_pair(static_cast<int>(fx), static_cast<int>(fy));
}

bool TrackMap::occupied_at(const Vec2 & p) const
{
  const auto cell = cell_of(p);
  return !cell || occupied(cell->first, cell->second);
}

double TrackMap::distance_at(const Vec2 & p) const
{
  const Vec2 g = world_to_grid(p);
  if (g.x < 0.0 || g.y < 0.0 || g.x >= width_ || g.y >= height_) {
    return 0.0;
  }
  const double u = std::clamp(g.x - 0.5, 0.0, static_cast<double>(width_ - 1));
  const double v = std::clamp(g.y - 0.5, 0.0, static_cast<double>(height_ - 1));
  const int i0 = std::min(static_cast<int>(u), width_ - 1);
  const int j0 = std::min(static_cast<int>(v), height_ - 1);
  const int i1 = std::min(i0 + 1, width_ - 1);
  const int j1 = std::min(j0 + 1, height_ - 1);
  const double fu = u - i0;
  const double fv = v - j0;
  const double d00 = cell_distance(i0, j0);
  if (std::isinf(d00)) {
    return kNoObstacle;
  }
  const double d10 = cell_distance(i1, j0);
  const double d01 = cell_distance(i0, j1);
  const double d11 = cell_distance(i1, j1);
  return (1.0 - fv) * ((1.0 - fu) * d00 + fu * d10) + fv * ((1.0 - fu) * d01 + fu * d11);
}

// ---------------------------------------------------------------------------
// Image and metadata I/O
// ---------------------------------------------------------------------------

namespace
{

GrayImage decode_pgm(std::span<const std::uint8_t> bytes)
{
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') {
          ++pos;
        }
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    long value = 0;
    const auto * first = reinterpret_cast<const char *>(bytes.data()) + pos;
    const auto * last = reinterpret_cast<const char *>(bytes.data()) + bytes.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || value < 0) {
      throw TrackError("malformed PGM header");
    }
    pos += static_cast<std::size_t>(res.ptr - first);
    return value;
  };
  const bool binary = bytes[1] == '5';
  pos = 2;
  const long width = read_int();
  const long height = read_int();
  const long maxval = read_int();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw TrackError("malformed PGM header");
  }
  GrayImage img;
  img.width = static_cast<int>(width);
  img.height = static_cast<int>(height);
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  img.luminance.resize(count);
  const double scale = 1.0 / static_cast<double>(maxval);
  if (binary) {
    ++pos;  // single whitespace after maxval
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    if (bytes.size() < pos + count * bpp) {
      throw TrackError("truncated PGM data");
    }
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t at = pos + i * bpp;
      const unsigned value = bpp == 1 ? bytes[at] : (unsigned{bytes[at]} << 8) | bytes[at + 1];
      img.luminance[i] = value * scale;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      img.luminance[i] = static_cast<double>(read_int()) * scale;
    }
  }
  return img;
}

GrayImage decode_png(std::span<const std::uint8_t> bytes)
{
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw TrackError(std::string("malformed PNG: ") + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw TrackError(std::string("malformed PNG: ") + image.message);
  }
  GrayImage img;
  img.width = static_cast<int>(image.width);
  img.height = static_cast<int>(image.height);
  img.luminance.resize(buffer.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    img.luminance[i] = buffer[i] / 255.0;
  }
  return img;
}

}  // namespace

GrayImage decode_image(std::span<const std::uint8_t> bytes)
{
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' &&
      bytes[3] == 'G') {
    return decode_png(bytes);
  }
  if (bytes.size() >= 3 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '2')) {
    return decode_pgm(bytes);
  }
  throw TrackError("unsupported or malformed image (expected PGM or PNG)");
}

std::vector<std::uint8_t> encode_pgm(const TrackMap & map)
{
  const std::string header = "P5\n" + std::to_string(map.width()) + " " +
                             std::to_string(map.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + static_cast<std::size_t>(map.width()) * map.height());
  for (int row = 0; row < map.height(); ++row) {
    const int iy = map.height() - 1 - row;
    for (int ix = 0; ix < map.width(); ++ix) {
      out.push_back(map.occupied(ix, iy) ? 0 : 255);
    }
  }
  return out;
}

MapMetadata parse_map_metadata(std::string_view text)
{
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception & e) {
    throw TrackError(std::string("malformed map metadata: ") + e.what());
  }
  MapMetadata meta;
  try {
    if (!root["image"] || !root["resolution"] || !root["origin"]) {
      throw TrackError("map metadata needs image, resolution and origin");
    }
    meta.image = root["image"].as<std::string>();
    meta.resolution = root["resolution"].as<double>();
    const auto origin = root["origin"].as<std::vector<double>>();
    if (origin.size() < 2) {
      throw TrackError("map metadata origin needs [x, y, yaw]");
    }
    meta.origin = {origin[0], origin[1], origin.size() > 2 ? origin[2] : 0.0};
    if (root["occupied_thresh"]) {
      meta.occupied_thresh = root["occupied_thresh"].as<double>();
    }
  } catch (const YAML::Exception & e) {
    throw TrackError(std::string("malformed map metadata: ") + e.what());
  }
  if (!(meta.resolution > 0.0)) {
    throw TrackError("map resolution must be positive");
  }
  if (!(meta.occupied_thresh >= 0.0 && meta.occupied_thresh <= 1.0)) {
    throw TrackError("occupied_thresh must lie in [0, 1]");
  }
  return meta;
}

std::string format_map_metadata(const MapMetadata & meta)
{
  std::ostringstream out;
  out.precision(17);
  out << "image: " << meta.image << "\n"
      << "resolution: " << meta.resolution << "\n"
      << "origin: [" << meta.origin.x << ", " << meta.origin.y << ", " << meta.origin.yaw << "]\n"
      << "occupied_thresh: " << meta.occupied_thresh << "\n";
  return out.str();
}

TrackMap load_map(std::span<const std::uint8_t> image_bytes, const MapMetadata & meta)
{
  if (!(meta.resolution > 0.0)) {
    throw TrackError("map resolution must be positive");
  }
  const GrayImage img = decode_image(image_bytes);
  std::vector<std::uint8_t> occ(img.luminance.size());
  std::size_t free_cells = 0;
  for (int row = 0; row < img.height; ++row) {
    const int iy = img.height - 1 - row;
    for (int col = 0; col < img.width; ++col) {
      const bool occupied = img.luminance[static_cast<std::size_t>(row) * img.width + col] <
                            meta.occupied_thresh;
      occ[static_cast<std::size_t>(iy) * img.width + col] = occupied ? 1 : 0;
      free_cells += occupied ? 0 : 1;
    }
  }
  if (free_cells == 0) {
    throw TrackError("map has no free cells");
  }
  return TrackMap(img.width, img.height, meta.resolution, meta.origin, std::move(occ));
}

namespace
{
std::string read_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw TrackError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}
}  // namespace

TrackMap load_map_file(const std::filesystem::path & metadata_path)
{
  const MapMetadata meta = parse_map_metadata(read_file(metadata_path));
  std::filesystem::path image = meta.image;
  if (image.is_relative()) {
    image = metadata_path.parent_path() / image;
  }
  const std::string bytes = read_file(image);
  return load_map(
    std::span(reinterpret_cast<const std::uint8_t *>(bytes.data()), bytes.size()), meta);
}

void save_map_files(
  const TrackMap & map, const std::filesystem::path & metadata_path, double occupied_thresh)
{
  std::filesystem::path image = metadata_path;
  image.replace_extension(".pgm");
  const auto bytes = encode_pgm(map);
  std::ofstream img(image, std::ios::binary);
  img.write(
    reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  MapMetadata meta;
  meta.image = image.filename().string();
  meta.resolution = map.resolution();
  meta.origin = map.origin();
  meta.occupied_thresh = occupied_thresh;
  std::ofstream yaml(metadata_path);
  yaml << format_map_metadata(meta);
  if (!img || !yaml) {
    throw TrackError("failed to write map files at " + metadata_path.string());
  }
}

// ---------------------------------------------------------------------------
// Centerline
// ---------------------------------------------------------------------------

Centerline make_centerline(
  std::vector<Vec2> points, std::vector<double> width_left, std::vector<double> width_right,
  bool closed)
{
  if (points.size() < 2 || width_left.size() != points.size() ||
      width_right.size() != points.size()) {
    throw TrackError("centerline needs >= 2 points with one width pair each");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y) ||
        !std::isfinite(width_left[i]) || !std::isfinite(width_right[i])) {
      throw TrackError("centerline contains non-finite values");
    }
    if (width_left[i] < 0.0 || width_right[i] < 0.0) {
      throw TrackError("centerline widths must be non-negative");
    }
  }
  Centerline line;
  double closing = 0.0;
  line.cum_s = cumulative_length(points, closed, &closing);
  for (std::size_t i = 1; i < line.cum_s.size(); ++i) {
    if (!(line.cum_s[i] > line.cum_s[i - 1])) {
      throw TrackError("centerline has repeated consecutive points");
    }
  }
  if (closed && !(closing > 0.0)) {
    throw TrackError("closed centerline repeats its first point at the end");
  }
  line.total_length = line.cum_s.back() + closing;
  line.points = std::move(points);
  line.width_left = std::move(width_left);
  line.width_right = std::move(width_right);
  line.closed = closed;
  return line;
}

namespace
{

// Labels 4-connected free components; returns the label per cell (-1 for
// occupied) and the size of each component.
std::vector<int> label_free_space(const TrackMap & map, std::vector<std::size_t> & sizes)
{
  const int w = map.width();
  const int h = map.height();
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  std::queue<std::pair<int, int>> frontier;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (map.occupied(x, y) || label[idx] >= 0) {
        continue;
      }
      const int id = static_cast<int>(sizes.size());
      sizes.push_back(0);
      label[idx] = id;
      frontier.emplace(x, y);
      while (!frontier.empty()) {
        const auto [cx, cy] = frontier.front();
        frontier.pop();
        ++sizes.back();
        constexpr int kDx[] = {1, -1, 0, 0};
        constexpr int kDy[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = cx + kDx[k];
          const int ny = cy + kDy[k];
          if (!map.in_bounds(nx, ny) || map.occupied(nx, ny)) {
            continue;
          }
          const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
          if (label[nidx] < 0) {
            label[nidx] = id;
            frontier.emplace(nx, ny);
          }
        }
      }
    }
  }
  return label;
}

bool inside_grid(const TrackMap & map, const Vec2 & p)
{
  return map.cell_of(p).has_value();
}

// Moves one step along the ridge: predict along `dir`, then slide along the
// normal to the maximum of the distance field.
Vec2 ridge_step(const TrackMap & map, const Vec2 & p, const Vec2 & dir, double step)
{
  const Vec2 predicted = p + dir * step;
  const Vec2 n = left_normal(dir);
  constexpr int kSamples = 20;
  double best_t = 0.0;
  double best_d = -1.0;
  int best_k = 0;
  std::array<double, 2 * kSamples + 1> values{};
  for (int k = -kSamples; k <= kSamples; ++k) {
    const double t = step * k / kSamples;
    const double d = map.distance_at(predicted + n * t);
    values[static_cast<std::size_t>(k + kSamples)] = d;
    if (d > best_d) {
      best_d = d;
      best_t = t;
      best_k = k;
    }
  }
  if (best_k > -kSamples && best_k < kSamples) {
    const double dm = values[static_cast<std::size_t>(best_k + kSamples - 1)];
    const double d0 = values[static_cast<std::size_t>(best_k + kSamples)];
    const double dp = values[static_cast<std::size_t>(best_k + kSamples + 1)];
    const double curv = dm - 2.0 * d0 + dp;
    if (curv < 0.0) {
      const double offset = 0.5 * (dm - dp) / curv;
      best_t += std::clamp(offset, -0.5, 0.5) * step / kSamples;
    }
  }
  return predicted + n * best_t;
}

std::vector<Vec2> trace_ridge(
  const TrackMap & map, const Vec2 & start, Vec2 dir, double step, bool closed,
  double min_loop_length, bool & returned)
{
  std::vector<Vec2> pts{start};
  double travelled = 0.0;
  const double wall = 0.5 * map.resolution();
  const std::size_t max_steps =
    static_cast<std::size_t>(4.0 * (map.width() + map.height()) * map.resolution() / step) *
      4 +
    1000;
  returned = false;
  Vec2 p = start;
  for (std::size_t k = 0; k < max_steps; ++k) {
    const Vec2 next = ridge_step(map, p, dir, step);
    if (!inside_grid(map, next)) {
      break;
    }
    if (map.distance_at(next) < wall) {
      break;
    }
    const Vec2 delta = next - p;
    const double len = norm(delta);
    if (len < 1e-9) {
      break;
    }
    dir = delta * (1.0 / len);
    travelled += len;
    p = next;
    if (closed && travelled > std::max(min_loop_length * 0.5, 4.0 * step) &&
        norm(p - start) < 1.5 * step) {
      returned = true;
      break;
    }
    pts.push_back(p);
  }
  return pts;
}

template <typename T>
std::vector<T> moving_average(const std::vector<T> & pts, std::size_t half, bool closed)
{
  const std::size_t n = pts.size();
  if (half == 0 || n < 3) {
    return pts;
  }
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    T acc{};
    std::size_t count = 0;
    const std::size_t h = closed ? half : std::min({half, i, n - 1 - i});
    for (std::size_t k = 0; k <= 2 * h; ++k) {
      const std::size_t j = (i + n + k - h) % n;
      acc = acc + pts[j];
      ++count;
    }
    out[i] = acc * (1.0 / static_cast<double>(count));
  }
  return out;
}

}  // namespace

Centerline extract_centerline(const TrackMap & map, const ExtractOptions & options)
{
  if (map.occupied_count() == 0) {
    throw TrackError("extract_centerline: map has no walls");
  }
  std::vector<std::size_t> sizes;
  const std::vector<int> label = label_free_space(map, sizes);
  if (sizes.empty()) {
    throw TrackError("extract_centerline: map has no free space");
  }
  // Specks below 1 m^2 are scanner noise, not separate tracks.
  const double cell_area = map.resolution() * map.resolution();
  const auto largest =
    static_cast<int>(std::distance(sizes.begin(), std::max_element(sizes.begin(), sizes.end())));
  for (std::size_t id = 0; id < sizes.size(); ++id) {
    if (static_cast<int>(id) != largest && static_cast<double>(sizes[id]) * cell_area >= 1.0) {
      throw TrackError("extract_centerline: free space is disconnected");
    }
  }

  // Seed at the widest point of the track.
  int seed_x = -1;
  int seed_y = -1;
  double seed_d = -1.0;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (label[static_cast<std::size_t>(y) * map.width() + x] == largest &&
          map.cell_distance(x, y) > seed_d) {
        seed_d = map.cell_distance(x, y);
        seed_x = x;
        seed_y = y;
      }
    }
  }
  const Vec2 seed = map.cell_center(seed_x, seed_y);

  // The ridge continues where the field stays highest on a ring around the seed.
  const double probe = std::max(2.0 * options.trace_step, 0.5 * seed_d);
  double best_heading = 0.0;
  double best_value = -1.0;
  for (int k = 0; k < 144; ++k) {
    const double heading = k * (2.0 * std::numbers::pi / 144.0);
    const double d = map.distance_at(seed + unit(heading) * probe);
    if (d > best_value) {
      best_value = d;
      best_heading = heading;
    }
  }
  const Vec2 dir0 = unit(best_heading);

  bool returned = false;
  std::vector<Vec2> trace =
    trace_ridge(map, seed, dir0, options.trace_step, options.closed, options.min_loop_length,
                returned);
  if (options.closed) {
    if (!returned) {
      throw TrackError("extract_centerline: ridge does not close (open track?)");
    }
  } else {
    bool unused = false;
    std::vector<Vec2> back =
      trace_ridge(map, seed, -dir0, options.trace_step, false, options.min_loop_length, unused);
    std::reverse(back.begin(), back.end());
    back.pop_back();  // seed is shared
    back.insert(back.end(), trace.begin(), trace.end());
    trace = std::move(back);
  }
  if (trace.size() < 4) {
    throw TrackError("extract_centerline: ridge trace too short");
  }

  const auto half =
    static_cast<std::size_t>(std::round(options.smoothing_window / options.trace_step));
  trace = moving_average(trace, half, options.closed);
  if (options.closed && signed_area(trace) < 0.0) {
    std::reverse(trace.begin(), trace.end());
  }

  const PlanarSpline spline(trace, options.closed);
  if (options.closed && spline.length() < options.min_loop_length) {
    throw TrackError("extract_centerline: loop shorter than the minimum length");
  }
  std::vector<Vec2> pts = spline.resample(options.spacing);
  std::vector<double> widths(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    widths[i] = map.distance_at(pts[i]);
  }
  // The raw distance field steps with the grid; averaging keeps the width
  // bounds from imprinting that staircase on the raceline.
  widths = moving_average(
    widths, static_cast<std::size_t>(std::round(options.smoothing_window / options.spacing)),
    options.closed);
  std::vector<double> widths_right = widths;
  return make_centerline(
    std::move(pts), std::move(widths), std::move(widths_right), options.closed);
}

Centerline load_centerline_csv(std::string_view text, bool closed)
{
  csv::Table table;
  try {
    table = csv::parse(text);
  } catch (const csv::CsvError & e) {
    throw TrackError(std::string("centerline CSV: ") + e.what());
  }
  for (const char * name : {"x_m", "y_m", "w_tr_left_m", "w_tr_right_m"}) {
    if (!table.column(name)) {
      throw TrackError("centerline CSV is missing column " + std::string(name));
    }
  }
  if (table.rows.size() < 4) {
    throw TrackError("centerline CSV needs at least 4 points");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> wl;
  std::vector<double> wr;
  try {
    xs = table.numbers("x_m");
    ys = table.numbers("y_m");
    wl = table.numbers("w_tr_left_m");
    wr = table.numbers("w_tr_right_m");
  } catch (const csv::CsvError & e) {
    throw TrackError(std::string("centerline CSV: ") + e.what());
  }
  std::vector<Vec2> pts(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    pts[i] = {xs[i], ys[i]};
  }
  return make_centerline(std::move(pts), std::move(wl), std::move(wr), closed);
}

std::string centerline_to_csv(const Centerline & line)
{
  csv::Writer out({"x_m", "y_m", "w_tr_left_m", "w_tr_right_m"});
  for (std::size_t i = 0; i < line.size(); ++i) {
    out.row({line.points[i].x, line.points[i].y, line.width_left[i], line.width_right[i]});
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Pose queries
// ---------------------------------------------------------------------------

PoseProjection project_pose(
  const Centerline & line, double x, double y, double yaw, std::optional<double> hint_s)
{
  const PolylineProjection proj = project_onto_polyline(
    line.points, line.cum_s, line.total_length, line.closed, {x, y}, hint_s,
    kMaxProjectionDistance);
  if (!(proj.distance <= kMaxProjectionDistance)) {
    throw TrackError("pose is more than 5 m from the centerline");
  }
  PoseProjection out;
  out.s = proj.s;
  out.d_c = proj.lateral;
  out.psi = wrap_angle(yaw - proj.heading);
  out.progress = line.total_length > 0.0 ? proj.s / line.total_length : 0.0;
  return out;
}

bool collision(const TrackMap & map, double x, double y, double halfwidth)
{
  if (!map.cell_of({x, y})) {
    return true;
  }
  return map.distance_at({x, y}) <= halfwidth;
}

}  // namespace tal::track
