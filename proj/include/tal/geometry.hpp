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

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace tal
{

struct Vec2
{
  double x{0.0};
  double y{0.0};

  constexpr Vec2 operator+(const Vec2 & o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2 & o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double k) const { return {x * k, y * k}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr bool operator==(const Vec2 &) const = default;
};

constexpr double dot(const Vec2 & a, const Vec2 & b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2 & a, const Vec2 & b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2 & a) { return std::hypot(a.x, a.y); }
// Rotates by +90 degrees.
constexpr Vec2 left_normal(const Vec2 & a) { return {-a.y, a.x}; }
inline Vec2 unit(double heading) { return {std::cos(heading), std::sin(heading)}; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a)
{
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) {
    a += kTwoPi;
  } else if (a > std::numbers::pi) {
    a -= kTwoPi;
  }
  return a;
}

/// Cumulative arc length, starting at zero. For closed polylines the closing
/// segment is not included; its length is returned through `closing_length`.
std::vector<double> cumulative_length(
  std::span<const Vec2> points, bool closed, double * closing_length = nullptr);

/// Signed area (positive for counter-clockwise loops).
double signed_area(std::span<const Vec2> loop);

/// Interpolating cubic spline through `values` at knots `t`. When periodic,
/// the curve wraps from the last knot back to the first over `period`.
class CubicSpline
{
public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> knots, std::vector<double> values, bool periodic, double period);

  double operator()(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

private:
  // Local coordinates of t within its knot interval.
  struct Terms
  {
    double a, b, h, y0, y1, m0, m1;
  };

  std::size_t segment(double & t) const;
  Terms terms(double t) const;

  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> second_;  // second derivatives at the knots
  bool periodic_{false};
  double period_{0.0};
};

/// Chord-length parameterized planar spline.
class PlanarSpline
{
public:
  PlanarSpline(std::span<const Vec2> points, bool closed);

  double length() const { return length_; }
  Vec2 at(double t) const { return {x_(t), y_(t)}; }
  Vec2 tangent(double t) const { return {x_.derivative(t), y_.derivative(t)}; }
  double curvature(double t) const;
  /// Samples at (approximately) uniform chord spacing. Closed curves never
  /// repeat the first point at the end.
  std::vector<Vec2> resample(double spacing) const;

private:
  CubicSpline x_;
  CubicSpline y_;
  double length_{0.0};
  bool closed_{false};
};

/// Closest-point query against an arc-length parameterized polyline.
struct PolylineProjection
{
  double s{0.0};          // arc length of the closest point
  double lateral{0.0};    // signed offset, left of the tangent positive
  double heading{0.0};    // tangent heading of the closest segment
  double distance{0.0};   // unsigned distance to the closest point
  std::size_t segment{0}; // index of the segment start point
  Vec2 point{};
};

/// Brute-force projection over all segments, or only those whose arc length
/// range intersects [hint - window, hint + window] (wrapping when closed).
PolylineProjection project_onto_polyline(
  std::span<const Vec2> points, std::span<const double> cum_s, double total_length, bool closed,
  const Vec2 & query, std::optional<double> hint_s = std::nullopt, double window = 5.0);

/// Point at arc length s (wrapped when closed, clamped otherwise).
Vec2 point_at_arc_length(
  std::span<const Vec2> points, std::span<const double> cum_s, double total_length, bool closed,
  double s, std::size_t * segment = nullptr);

}  // namespace tal
