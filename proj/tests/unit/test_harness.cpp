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

#include "tal/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "tal/csv.hpp"
#include "tal/rng.hpp"

namespace tal::harness
{
namespace
{

namespace fs = std::filesystem;

// Small networks and short runs keep these tests to a few seconds.
config::ExperimentConfig small_config()
{
  config::ExperimentConfig c;
  c.map = "annulus";
  c.env.vehicle.v_max = 4.0;
  c.train_steps = 300;
  c.eval_episodes = 2;
  c.td3.hidden = {16, 16};
  c.td3.batch_size = 32;
  c.td3.warmup_steps = 200;
  c.td3.buffer_capacity = 1000;
  return c;
}

const TrackBundle & annulus()
{
  static const TrackBundle b = load_track(small_config());
  return b;
}

fs::path scratch(const std::string & name)
{
  const auto dir = fs::temp_directory_path() / ("tal_harness_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Training, NoUpdatesDuringWarmup)
{
  auto c = small_config();
  c.train_steps = 200;
  const auto r = run_training(c, annulus(), 1);
  EXPECT_EQ(r.agent.update_count(), 0);
  // Untouched networks still equal their targets.
  const std::vector<double> x(r.agent.state_dim(), 0.3);
  EXPECT_EQ(r.agent.actor().forward(x), r.agent.actor_target().forward(x));

  c.train_steps = 250;
  const auto s = run_training(c, annulus(), 1);
  EXPECT_EQ(s.agent.update_count(), 50);
}

TEST(Training, CurveIsSeedDeterministic)
{
  const auto c = small_config();
  const auto a = curve_to_csv(run_training(c, annulus(), 3).curve);
  const auto b = curve_to_csv(run_training(c, annulus(), 3).curve);
  const auto d = curve_to_csv(run_training(c, annulus(), 4).curve);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, d);
}

TEST(Training, WritesArtifactsThatReload)
{
  const auto dir = scratch("train");
  const auto c = small_config();
  const auto r = run_training(c, annulus(), 2, dir);
  EXPECT_EQ(read_file(dir / "config.txt"), config::to_text(c));
  EXPECT_EQ(read_file(dir / "curve.csv"), curve_to_csv(r.curve));
  std::istringstream in(read_file(dir / "agent.ckpt"));
  const auto loaded = td3::Td3Agent::load(in);
  const std::vector<double> x(r.agent.state_dim(), -0.2);
  EXPECT_EQ(loaded.actor().forward(x), r.agent.actor().forward(x));
  fs::remove_all(dir);
}

TEST(Evaluation, ClassicPlannerLapsTheAnnulus)
{
  auto c = small_config();
  c.eval_episodes = 3;
  const auto s = run_evaluation(c, annulus(), classic_policy(), 1, true);
  EXPECT_EQ(s.completion_rate, 1.0);
  ASSERT_EQ(s.laps.size(), 3u);
  ASSERT_EQ(s.traces.size(), 3u);
  const double predicted = raceline::predicted_lap_time(annulus().raceline);
  EXPECT_NEAR(s.mean_lap_time, predicted, 0.05 * predicted);
  EXPECT_EQ(s.mean_progress, 1.0);
  // Past the launch the car holds the profile speed.
  const auto & trace = representative_trace(s);
  for (std::size_t i = 30; i < trace.size(); ++i) {
    EXPECT_NEAR(trace[i].state.speed, trace[i].classic.speed_ref, 0.3) << "row " << i;
  }
}

TEST(Evaluation, FullLockPolicyCrashesEarly)
{
  auto c = small_config();
  const Policy wall = [](const env::RacingEnv & e, std::span<const double>) {
    return vehicle::ControlAction{e.config().vehicle.steer_max, e.config().vehicle.v_max};
  };
  const auto s = run_evaluation(c, annulus(), wall, 1);
  EXPECT_EQ(s.completion_rate, 0.0);
  EXPECT_LT(s.mean_progress, 0.1);
  EXPECT_TRUE(std::isnan(s.mean_lap_time));
  EXPECT_TRUE(s.laps.front().crashed);
  EXPECT_THROW(representative_trace(s), HarnessError);
}

TEST(Export, SpeedSlipRoundTrip)
{
  const auto s = run_evaluation(small_config(), annulus(), classic_policy(), 1, true);
  const auto & trace = representative_trace(s);
  const auto csv_text = export_speed_slip_profile(trace);
  const auto p = load_speed_slip_csv(csv_text);
  const auto q = speed_slip_profile(trace);
  ASSERT_EQ(p.s.size(), trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    EXPECT_EQ(p.s[i], q.s[i]);
    EXPECT_EQ(p.speed[i], q.speed[i]);
    EXPECT_EQ(p.abs_slip_deg[i], q.abs_slip_deg[i]);
    EXPECT_EQ(p.classic_speed[i], q.classic_speed[i]);
    EXPECT_GE(p.abs_slip_deg[i], 0.0);
  }
  EXPECT_THROW(speed_slip_profile({}), HarnessError);
}

TEST(Results, CsvRoundTripAndDirName)
{
  const CellKey k{"aut", env::RewardMode::kBaseline, 6.0, 3};
  EXPECT_EQ(k.dir_name(), "aut_baseline_v6_s3");
  const std::vector<ResultRow> rows{
    {k, 0.5, 21.25, 0.75, 1000, "ok"},
    {{"esp", env::RewardMode::kTal, 8.0, 1}, 0.0, std::nan(""), 0.125, 1000, "failed: x"}};
  const auto back = load_results_csv(results_to_csv(rows));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].key.dir_name(), k.dir_name());
  EXPECT_EQ(back[0].mean_lap_time, 21.25);
  EXPECT_TRUE(std::isnan(back[1].mean_lap_time));
  EXPECT_EQ(back[1].status, "failed: x");
  EXPECT_THROW(load_results_csv("a,b\n"), HarnessError);
}

TEST(Results, SummaryBandDropsExtremeSeeds)
{
  std::vector<ResultRow> rows;
  const double progress[] = {0.1, 0.5, 0.6, 0.9};
  for (std::uint64_t s = 0; s < 4; ++s) {
    rows.push_back(
      {{"aut", env::RewardMode::kTal, 6.0, s}, 0.0, std::nan(""), progress[s], 1, "ok"});
  }
  rows.push_back({{"aut", env::RewardMode::kTal, 6.0, 9}, 0.0, std::nan(""), 0.0, 1, "failed: y"});
  const auto t = csv::parse(summary_to_csv(rows));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.numbers("n_seeds")[0], 4.0);
  EXPECT_NEAR(t.numbers("mean_progress")[0], 0.525, 1e-12);
  EXPECT_EQ(t.numbers("band_low_progress")[0], 0.5);
  EXPECT_EQ(t.numbers("band_high_progress")[0], 0.6);
  EXPECT_NEAR(t.numbers("trimmed_mean_progress")[0], 0.55, 1e-12);
}

TEST(Matrix, RunsCellsAndReusesFinishedOnes)
{
  const auto dir = scratch("matrix");
  const auto base = small_config();
  const MatrixSpec spec{{"annulus", "no_such_map"}, {env::RewardMode::kTal}, {4.0}, {1}, 1};
  std::ostringstream log;
  const auto rows = run_matrix(base, spec, dir, &log);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].status, "ok");
  EXPECT_EQ(rows[1].status.rfind("failed", 0), 0u);

  const auto cell = dir / "cells" / rows[0].key.dir_name();
  for (const char * f : {"config.txt", "curve.csv", "agent.ckpt", "eval.csv", "trace.csv",
                         "speed_slip.csv", "result.csv"}) {
    EXPECT_TRUE(fs::exists(cell / f)) << f;
  }
  // The row agrees with the per-episode file.
  const auto eval = csv::parse(read_file(cell / "eval.csv"));
  const auto p = eval.numbers("progress");
  const auto done = eval.numbers("completed");
  EXPECT_NEAR(
    rows[0].mean_progress, std::accumulate(p.begin(), p.end(), 0.0) / p.size(), 1e-12);
  EXPECT_NEAR(
    rows[0].completion_rate, std::accumulate(done.begin(), done.end(), 0.0) / done.size(),
    1e-12);
  EXPECT_EQ(read_file(dir / "results.csv"), results_to_csv(rows));
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));

  // A second run only retries the failed cell.
  const auto before = read_file(cell / "curve.csv");
  std::ostringstream again;
  const auto rows2 = run_matrix(base, spec, dir, &again);
  EXPECT_EQ(again.str().find("cell " + rows[0].key.dir_name()), std::string::npos);
  EXPECT_NE(again.str().find("cell no_such_map"), std::string::npos);
  EXPECT_EQ(results_to_csv(rows2), results_to_csv(rows));

  // Changing the configuration invalidates the cache.
  auto changed = base;
  changed.train_steps = 250;
  std::ostringstream third;
  run_matrix(changed, spec, dir, &third);
  EXPECT_NE(third.str().find("cell " + rows[0].key.dir_name()), std::string::npos);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace tal::harness
