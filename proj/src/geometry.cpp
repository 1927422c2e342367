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

#include "tal/geometry.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace tal
{

std::vector<double> cumulative_length(
  std::span<const Vec2> points, bool closed, double * closing_length)
{
  std::vector<double> cum(points.size(), 0.0);
  for (std::size_t i = 1; i < points.size(); ++i) {
    cum[i] = cum[i - 1] + norm(points[i] - points[i - 1]);
  }
  if (closing_length) {
    *closing_length = (closed && points.size() > 1) ? norm(points.front() - points.back()) : 0.0;
  }
  return cum;
}

double signed_area(std::span<const Vec2> loop)
{
  double area = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    area += cross(loop[i], loop[(i + 1) % loop.size()]);
  }
  return 0.5 * area;
}

CubicSpline::CubicSpline(
  std::vector<double> knots, std::vector<double> values, bool periodic, double period)
: knots_(std::move(knots)), values_(std::move(values)), periodic_(periodic), period_(period)
{
  const std::size_t n = knots_.size();
  if (n < 3 || values_.size() != n) {
    throw std::invalid_argument("CubicSpline: need at least 3 knots with matching values");
  }
  if (periodic_ && !(period_ > knots_.back() - knots_.front())) {
    throw std::invalid_argument("CubicSpline: period must exceed the knot span");
  }
  auto h = [&](std::size_t i) {
    return (periodic_ && i == n - 1) ? knots_.front() + period_ - knots_.back()
                                     : knots_[i + 1] - knots_[i];
  };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(h(i) > 0.0)) {
      throw std::invalid_argument("CubicSpline: knots must be strictly increasing");
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (!periodic_ && (i == 0 || i == n - 1)) {
      triplets.emplace_back(row, row, 1.0);
      continue;
    }
    const std::size_t prev = (i + n - 1) % n;
    const std::size_t next = (i + 1) % n;
    const double h_prev = h(prev);
    const double h_cur = h(i);
    triplets.emplace_back(row, static_cast<Eigen::Index>(prev), h_prev);
    triplets.emplace_back(row, row, 2.0 * (h_prev + h_cur));
    triplets.emplace_back(row, static_cast<Eigen::Index>(next), h_cur);
    rhs[row] = 6.0 * ((values_[next] - values_[i]) / h_cur - (values_[i] - values_[prev]) / h_prev);
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) {
    throw std::runtime_error("CubicSpline: singular system");
  }
  const Eigen::VectorXd m = lu.solve(rhs);
  second_.assign(m.data(), m.data() + m.size());
}

std::size_t CubicSpline::segment(double & t) const
{
  const std::size_t n = knots_.size();
  if (periodic_) {
    t = knots_.front() + std::fmod(t - knots_.front(), period_);
    if (t < knots_.front()) {
      t += period_;
    }
    if (t >= knots_.back()) {
      return n - 1;
    }
  } else {
    t = std::clamp(t, knots_.front(), knots_.back());
  }
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const auto idx = static_cast<std::size_t>(std::distance(knots_.begin(), it));
  return std::min(idx == 0 ? 0 : idx - 1, n - 2);
}

CubicSpline::Terms CubicSpline::terms(double t) const
{
  const std::size_t i = segment(t);
  const std::size_t j = (i + 1) % knots_.size();
  const double t1 = (j == 0) ? knots_.front() + period_ : knots_[j];
  return {t1 - t, t - knots_[i], t1 - knots_[i], values_[i], values_[j], second_[i], second_[j]};
}

double CubicSpline::operator()(double t) const
{
  const Terms s = terms(t);
  return s.m0 * s.a * s.a * s.a / (6.0 * s.h) + s.m1 * s.b * s.b * s.b / (6.0 * s.h) +
         (s.y0 - s.m0 * s.h * s.h / 6.0) * s.a / s.h + (s.y1 - s.m1 * s.h * s.h / 6.0) * s.b / s.h;
}

double CubicSpline::derivative(double t) const
{
  const Terms s = terms(t);
  return -s.m0 * s.a * s.a / (2.0 * s.h) + s.m1 * s.b * s.b / (2.0 * s.h) -
         (s.y0 - s.m0 * s.h * s.h / 6.0) / s.h + (s.y1 - s.m1 * s.h * s.h / 6.0) / s.h;
}

double CubicSpline::second_derivative(double t) const
{
  const Terms s = terms(t);
  return (s.m0 * s.a + s.m1 * s.b) / s.h;
}

PlanarSpline::PlanarSpline(std::span<const Vec2> points, bool closed) : closed_(closed)
{
  double closing = 0.0;
  std::vector<double> knots = cumulative_length(points, closed, &closing);
  length_ = knots.back() + closing;
  std::vector<double> xs(points.size());
  std::vector<double> ys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    xs[i] = points[i].x;
    ys[i] = points[i].y;
  }
  x_ = CubicSpline(knots, std::move(xs), closed, length_);
  y_ = CubicSpline(std::move(knots), std::move(ys), closed, length_);
}

double PlanarSpline::curvature(double t) const
{
  const double dx = x_.derivative(t);
  const double dy = y_.derivative(t);
  const double ddx = x_.second_derivative(t);
  const double ddy = y_.second_derivative(t);
  return (dx * ddy - dy * ddx) / std::pow(dx * dx + dy * dy, 1.5);
}

std::vector<Vec2> PlanarSpline::resample(double spacing) const
{
  if (!(spacing > 0.0)) {
    throw std::invalid_argument("resample: spacing must be positive");
  }
  // Dense arc-length table, then invert it.
  const auto dense = static_cast<std::size_t>(std::max(2000.0, 20.0 * length_ / spacing));
  std::vector<double> params(dense + 1);
  std::vector<double> arc(dense + 1, 0.0);
  Vec2 prev = at(0.0);
  for (std::size_t k = 0; k <= dense; ++k) {
    params[k] = length_ * static_cast<double>(k) / static_cast<double>(dense);
    const Vec2 p = at(params[k]);
    if (k > 0) {
      arc[k] = arc[k - 1] + norm(p - prev);
    }
    prev = p;
  }
  const double total = arc.back();
  const auto count = static_cast<std::size_t>(std::max(2.0, std::round(total / spacing)));
  const double step = total / static_cast<double>(count);
  const std::size_t samples = closed_ ? count : count + 1;
  std::vector<Vec2> out;
  out.reserve(samples);
  std::size_t k = 0;
  for (std::size_t m = 0; m < samples; ++m) {
    const double target = std::min(step * static_cast<double>(m), total);
    while (k + 1 < dense && arc[k + 1] < target) {
      ++k;
    }
    const double span = arc[k + 1] - arc[k];
    const double frac = span > 0.0 ? (target - arc[k]) / span : 0.0;
    out.push_back(at(params[k] + frac * (params[k + 1] - params[k])));
  }
  return out;
}

namespace
{
// Distance from `hint` to the interval [lo, hi] on a circle of length `period`.
double circular_gap(double hint, double lo, double hi, double period)
{
  if (period <= 0.0) {
    return hint < lo ? lo - hint : (hint > hi ? hint - hi : 0.0);
  }
  double best = std::numeric_limits<double>::infinity();
  for (int k = -1; k <= 1; ++k) {
    const double h = hint + k * period;
    const double gap = h < lo ? lo - h : (h > hi ? h - hi : 0.0);
    best = std::min(best, gap);
  }
  return best;
}
}  // namespace

PolylineProjection project_onto_polyline(
  std::span<const Vec2> points, std::span<const double> cum_s, double total_length, bool closed,
  const Vec2 & query, std::optional<double> hint_s, double window)
{
  const std::size_t n = points.size();
  if (n < 2) {
    throw std::invalid_argument("project_onto_polyline: need at least 2 points");
  }
  const std::size_t segments = closed ? n : n - 1;
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < segments; ++i) {
    const Vec2 & a = points[i];
    const Vec2 & b = points[(i + 1) % n];
    const double seg_start = cum_s[i];
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    const double len = std::sqrt(len2);
    if (hint_s && circular_gap(*hint_s, seg_start, seg_start + len, closed ? total_length : 0.0) >
                    window) {
      continue;
    }
    double t = len2 > 0.0 ? dot(query - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 foot = a + ab * t;
    const double d = norm(query - foot);
    if (d < best.distance) {
      best.distance = d;
      best.segment = i;
      best.point = foot;
      best.s = seg_start + t * len;
      best.heading = std::atan2(ab.y, ab.x);
      best.lateral = len > 0.0 ? cross(ab, query - a) / len : 0.0;
    }
  }
  if (closed && best.s >= total_length) {
    best.s -= total_length;
  }
  return best;
}

Vec2 point_at_arc_length(
  std::span<const Vec2> points, std::span<const double> cum_s, double total_length, bool closed,
  double s, std::size_t * segment)
{
  const std::size_t n = points.size();
  if (n == 0) {
    throw std::invalid_argument("point_at_arc_length: empty polyline");
  }
  if (closed) {
    s = std::fmod(s, total_length);
    if (s < 0.0) {
      s += total_length;
    }
  } else {
    s = std::clamp(s, 0.0, cum_s.back());
  }
  const auto it = std::upper_bound(cum_s.begin(), cum_s.end(), s);
  std::size_t i = static_cast<std::size_t>(std::distance(cum_s.begin(), it));
  i = i == 0 ? 0 : i - 1;
  if (!closed && i == n - 1) {
    i = n >= 2 ? n - 2 : 0;
  }
  if (segment) {
    *segment = i;
  }
  if (n == 1) {
    return points[0];
  }
  const std::size_t j = (i + 1) % n;
  const double seg_end = (j == 0) ? total_length : cum_s[j];
  const double len = seg_end - cum_s[i];
  const double t = len > 0.0 ? std::clamp((s - cum_s[i]) / len, 0.0, 1.0) : 0.0;
  return points[i] + (points[j] - points[i]) * t;
}

}  // namespace tal
