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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "tal/fixtures.hpp"

namespace tal::lidar
{
namespace
{

constexpr double kPi = std::numbers::pi;

track::TrackMap empty_map()
{
  return track::TrackMap(100, 100, 0.05, {-2.5, -2.5, 0.0}, std::vector<std::uint8_t>(10000, 0));
}

TEST(CastRay, EmptyMapReturnsMaxRange)
{
  const auto map = empty_map();
  for (double a = 0.0; a < 2.0 * kPi; a += 0.4) {
    EXPECT_EQ(cast_ray(map, {0.0, 0.0}, a, 10.0), 10.0);
  }
}

TEST(CastRay, PerpendicularWall)
{
  // Wall column starting at x = 2.0.
  const int n = 100;
  std::vector<std::uint8_t> occ(n * n, 0);
  for (int y = 0; y < n; ++y) {
    occ[y * n + 60] = 1;
  }
  const track::TrackMap map(n, n, 0.05, {-1.0, -2.5, 0.0}, occ);
  EXPECT_NEAR(cast_ray(map, {0.0, 0.0}, 0.0, 10.0), 2.0, 0.05);
  EXPECT_EQ(cast_ray(map, {0.0, 0.0}, kPi, 10.0), 10.0);
}

TEST(CastRay, OriginInWallThrows)
{
  const auto map = fixtures::corridor(4.0, 1.0);
  EXPECT_THROW(cast_ray(map, {2.0, 0.9}, 0.0, 10.0), LidarError);
}

TEST(CastRay, MatchesFineMarching)
{
  Rng rng(2024);
  for (int k = 0; k < 200; ++k) {
    const auto c = oracle::random_ray_case(rng);
    const double res = c.map.resolution();
    const double got = cast_ray(c.map, c.origin, c.angle, 10.0);
    const double want = oracle::march_ray(c.map, c.origin, c.angle, 10.0, res / 10.0);
    EXPECT_NEAR(got, want, res) << "case " << k;
  }
}

TEST(BeamAngles, TwentyBeamsOverPi)
{
  const auto a = beam_angles(20, kPi);
  ASSERT_EQ(a.size(), 20u);
  EXPECT_NEAR(a.front(), -kPi / 2.0, 1e-15);
  EXPECT_NEAR(a.back(), kPi / 2.0, 1e-15);
  for (std::size_t i = 1; i < a.size(); ++i) {
    EXPECT_NEAR(a[i] - a[i - 1], kPi / 19.0, 1e-12);
  }
}

TEST(Scan, NoiselessCorridorIsSymmetric)
{
  const auto map = fixtures::corridor(20.0, 1.6);
  LidarConfig cfg;
  cfg.noise_sigma = 0.0;
  Rng rng(1);
  const auto s = scan(map, 5.0, 0.0, 0.0, cfg, rng);
  for (std::size_t i = 0; i < s.beams.size(); ++i) {
    EXPECT_NEAR(s.beams[i], s.beams[s.beams.size() - 1 - i], map.resolution());
  }
  Rng other(99);
  EXPECT_EQ(scan(map, 5.0, 0.0, 0.0, cfg, other).beams, s.beams);
}

TEST(Scan, NoiseStatisticsAndClamping)
{
  const auto map = fixtures::corridor(20.0, 1.6);
  LidarConfig cfg;
  Rng rng(17);
  const int n = 10000;
  std::vector<double> sum(20, 0.0);
  std::vector<double> sq(20, 0.0);
  for (int k = 0; k < n; ++k) {
    const auto s = scan(map, 5.0, 0.0, 0.0, cfg, rng);
    for (std::size_t i = 0; i < 20; ++i) {
      ASSERT_GE(s.beams[i], 0.0);
      ASSERT_LE(s.beams[i], cfg.max_range);
      sum[i] += s.beams[i];
      sq[i] += s.beams[i] * s.beams[i];
    }
  }
  for (std::size_t i = 0; i < 20; ++i) {
    const double mean = sum[i] / n;
    if (mean > cfg.max_range - 0.05) {
      continue;  // clamped at max range
    }
    const double sd = std::sqrt(sq[i] / n - mean * mean);
    EXPECT_GE(sd, 0.008) << "beam " << i;
    EXPECT_LE(sd, 0.012) << "beam " << i;
  }
}

TEST(Scan, SeededNoiseIsReproducible)
{
  const auto map = fixtures::corridor(20.0, 1.6);
  LidarConfig cfg;
  Rng a(5);
  Rng b(5);
  EXPECT_EQ(scan(map, 5.0, 0.1, 0.2, cfg, a).beams, scan(map, 5.0, 0.1, 0.2, cfg, b).beams);
}

TEST(Scan, RotationEquivariance)
{
  // Rotate a square room with a pillar by 90 degrees about its center.
  const int n = 80;
  const double res = 0.05;
  std::vector<std::uint8_t> occ(n * n, 0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const bool border = x < 2 || y < 2 || x >= n - 2 || y >= n - 2;
      const bool pillar = x >= 50 && x < 58 && y >= 20 && y < 35;
      occ[y * n + x] = border || pillar ? 1 : 0;
    }
  }
  std::vector<std::uint8_t> rot(n * n, 0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      rot[x * n + (n - 1 - y)] = occ[y * n + x];
    }
  }
  const track::TrackMap a(n, n, res, {0.0, 0.0, 0.0}, occ);
  const track::TrackMap b(n, n, res, {0.0, 0.0, 0.0}, rot);
  const double c = n * res / 2.0;
  LidarConfig cfg;
  cfg.noise_sigma = 0.0;
  Rng rng(0);
  const Vec2 p{1.3, 1.1};
  const Vec2 q{c - (p.y - c), c + (p.x - c)};
  const auto sa = scan(a, p.x, p.y, 0.4, cfg, rng);
  const auto sb = scan(b, q.x, q.y, 0.4 + kPi / 2.0, cfg, rng);
  for (std::size_t i = 0; i < sa.beams.size(); ++i) {
    EXPECT_NEAR(sa.beams[i], sb.beams[i], res);
  }
}

}  // namespace
}  // namespace tal::lidar
