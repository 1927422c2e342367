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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "tal/csv.hpp"
#include "tal/fixtures.hpp"
#include "tal/pursuit.hpp"
#include "tal/rng.hpp"

namespace tal::harness
{
namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string number_or_empty(double v) { return std::isfinite(v) ? csv::format_number(v) : ""; }

double number_or_nan(const std::string & s)
{
  if (s.empty() || s == "nan") {
    return kNaN;
  }
  return std::stod(s);
}

const std::vector<std::string> kResultHeader = {
  "map",           "reward_mode",     "v_max",         "seed",       "completion_rate",
  "mean_lap_time_s", "mean_progress", "train_steps",   "status"};

}  // namespace

void write_file(const std::filesystem::path & path, std::string_view contents)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw HarnessError("failed writing " + path.string());
  }
}

std::string read_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw HarnessError("cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TrackBundle load_track(const config::ExperimentConfig & config)
{
  const auto names = fixtures::names();
  const bool is_fixture = std::find(names.begin(), names.end(), config.map) != names.end();
  std::optional<track::TrackMap> map;
  std::string name = config.map;
  if (is_fixture) {
    map = fixtures::by_name(config.map).map;
  } else {
    map = track::load_map_file(config.map);
    name = std::filesystem::path(config.map).stem().string();
  }
  auto centerline = config.centerline.empty()
                      ? track::extract_centerline(*map, config.extract)
                      : track::load_centerline_csv(read_file(config.centerline), true);
  auto race = raceline::generate_raceline(centerline, config.raceline_params());
  return {name, std::move(*map), std::move(centerline), std::move(race)};
}

env::RacingEnv make_env(
  const config::ExperimentConfig & config, const TrackBundle & track, bool training,
  std::uint64_t seed)
{
  auto ec = config.env;
  ec.reward_mode = config.reward_mode;
  ec.random_start = training && config.train_random_start;
  return env::RacingEnv(track.map, track.centerline, track.raceline, ec, seed);
}

std::string curve_to_csv(const TrainingCurve & curve)
{
  csv::Writer w({"episode", "reward", "progress", "steps", "crashed", "completed"});
  for (const auto & e : curve) {
    w.row({static_cast<double>(e.episode), e.reward, e.progress, static_cast<double>(e.steps),
           e.crashed ? 1.0 : 0.0, e.completed ? 1.0 : 0.0});
  }
  return w.str();
}

TrainingResult run_training(
  const config::ExperimentConfig & config, const TrackBundle & track, std::uint64_t seed,
  const std::filesystem::path & out_dir, std::ostream * log)
{
  config.validate();
  auto env = make_env(config, track, true, stream_seed(seed, "env.train"));
  Rng init_rng = make_stream(seed, "agent.init");
  Rng explore_rng = make_stream(seed, "exploration");
  Rng sample_rng = make_stream(seed, "sampling");

  const std::size_t obs_dim = env.observation_size();
  td3::Td3Agent agent(obs_dim, 2, config.td3, init_rng);
  td3::ReplayBuffer buffer(config.td3.buffer_capacity, obs_dim, 2);
  TrainingCurve curve;

  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  auto obs = env.reset();
  double episode_reward = 0.0;
  for (std::int64_t t = 0; t < config.train_steps; ++t) {
    std::vector<double> action;
    if (static_cast<std::size_t>(t) < config.td3.warmup_steps) {
      action = {uniform(explore_rng), uniform(explore_rng)};
    } else {
      action = agent.select_action(obs, true, explore_rng);
    }
    auto out = env.step(action);
    episode_reward += out.reward;
    // Budget truncation is not a terminal state, so it still bootstraps.
    const bool terminal = out.info.crashed || out.info.lap_complete;
    buffer.push({obs, action, out.reward, out.observation, terminal});
    obs = std::move(out.observation);

    if (static_cast<std::size_t>(t) >= config.td3.warmup_steps &&
        buffer.size() >= config.td3.batch_size) {
      agent.update(buffer, sample_rng);
    }
    if (out.done) {
      curve.push_back(
        {static_cast<int>(curve.size()), episode_reward, out.info.progress, out.info.step,
         out.info.crashed, out.info.lap_complete});
      if (log != nullptr && curve.size() % 50 == 0) {
        *log << "  step " << (t + 1) << " episode " << curve.size() << " progress "
             << out.info.progress << "\n";
      }
      episode_reward = 0.0;
      obs = env.reset();
    }
  }

  if (!out_dir.empty()) {
    write_file(out_dir / "config.txt", config::to_text(config));
    write_file(out_dir / "curve.csv", curve_to_csv(curve));
    std::ostringstream ckpt;
    agent.save(ckpt);
    write_file(out_dir / "agent.ckpt", ckpt.str());
  }
  return {std::move(agent), std::move(curve)};
}

Policy classic_policy()
{
  return [](const env::RacingEnv & env, std::span<const double>) { return env.classic_action(); };
}

Policy agent_policy(const td3::Td3Agent & agent)
{
  return [&agent](const env::RacingEnv & env, std::span<const double> obs) {
    Rng unused(0);
    const auto a = agent.select_action(obs, false, unused);
    return env::scale_action(a, env.config().vehicle);
  };
}

EvalSummary run_evaluation(
  const config::ExperimentConfig & config, const TrackBundle & track, const Policy & policy,
  std::uint64_t seed, bool keep_traces)
{
  auto env = make_env(config, track, false, stream_seed(seed, "env.eval"));
  env.set_record_trace(keep_traces);
  EvalSummary summary;
  int completed = 0;
  double lap_time_sum = 0.0;
  double progress_sum = 0.0;
  for (int ep = 0; ep < config.eval_episodes; ++ep) {
    auto obs = env.reset(0.0);
    env::StepOutcome out;
    do {
      out = env.step_control(policy(env, obs));
      obs = out.observation;
    } while (!out.done);
    LapRecord lap{ep,
                  out.info.lap_complete,
                  out.info.crashed,
                  out.info.progress,
                  out.info.lap_time,
                  out.info.step};
    if (lap.completed) {
      ++completed;
      lap_time_sum += lap.lap_time;
    }
    progress_sum += lap.progress;
    summary.laps.push_back(lap);
    if (keep_traces) {
      summary.traces.push_back(env.trace());
    }
  }
  const double n = static_cast<double>(config.eval_episodes);
  summary.completion_rate = completed / n;
  summary.mean_lap_time = completed > 0 ? lap_time_sum / completed : kNaN;
  summary.mean_progress = progress_sum / n;
  return summary;
}

std::string laps_to_csv(const EvalSummary & summary)
{
  csv::Writer w({"episode", "completed", "crashed", "progress", "lap_time_s", "steps"});
  for (const auto & l : summary.laps) {
    w.row({static_cast<double>(l.episode), l.completed ? 1.0 : 0.0, l.crashed ? 1.0 : 0.0,
           l.progress, l.lap_time, static_cast<double>(l.steps)});
  }
  return w.str();
}

const std::vector<env::TraceRow> & representative_trace(const EvalSummary & summary)
{
  if (summary.traces.empty()) {
    throw HarnessError("evaluation kept no traces");
  }
  for (std::size_t i = 0; i < summary.laps.size() && i < summary.traces.size(); ++i) {
    if (summary.laps[i].completed) {
      return summary.traces[i];
    }
  }
  return summary.traces.front();
}

SpeedSlipProfile speed_slip_profile(std::span<const env::TraceRow> trace)
{
  if (trace.empty()) {
    throw HarnessError("speed/slip export needs a non-empty trace");
  }
  SpeedSlipProfile p;
  for (const auto & r : trace) {
    p.s.push_back(r.s);
    p.speed.push_back(r.state.speed);
    p.abs_slip_deg.push_back(std::abs(r.state.slip) * 180.0 / std::numbers::pi);
    p.classic_speed.push_back(r.classic.speed_ref);
  }
  return p;
}

std::string speed_slip_to_csv(const SpeedSlipProfile & profile)
{
  csv::Writer w({"s_m", "v_mps", "abs_slip_deg", "v_classic_mps"});
  for (std::size_t i = 0; i < profile.s.size(); ++i) {
    w.row({profile.s[i], profile.speed[i], profile.abs_slip_deg[i], profile.classic_speed[i]});
  }
  return w.str();
}

SpeedSlipProfile load_speed_slip_csv(std::string_view text)
{
  const auto t = csv::parse(text);
  return {t.numbers("s_m"), t.numbers("v_mps"), t.numbers("abs_slip_deg"),
          t.numbers("v_classic_mps")};
}

std::string export_speed_slip_profile(std::span<const env::TraceRow> trace)
{
  return speed_slip_to_csv(speed_slip_profile(trace));
}

std::string CellKey::dir_name() const
{
  return map + "_" + std::string(env::to_string(mode)) + "_v" + csv::format_number(v_max) +
         "_s" + std::to_string(seed);
}

std::string results_to_csv(std::span<const ResultRow> rows)
{
  csv::Writer w(kResultHeader);
  for (const auto & r : rows) {
    w.text_row(
      {r.key.map, std::string(env::to_string(r.key.mode)), csv::format_number(r.key.v_max),
       std::to_string(r.key.seed), csv::format_number(r.completion_rate),
       number_or_empty(r.mean_lap_time), csv::format_number(r.mean_progress),
       std::to_string(r.train_steps), r.status});
  }
  return w.str();
}

std::vector<ResultRow> load_results_csv(std::string_view text)
{
  const auto t = csv::parse(text);
  if (t.header != kResultHeader) {
    throw HarnessError("results CSV header does not match");
  }
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto & f = t.rows[i];
    ResultRow r;
    r.key.map = f[0];
    r.key.mode = env::parse_reward_mode(f[1]);
    r.key.v_max = std::stod(f[2]);
    r.key.seed = std::stoull(f[3]);
    r.completion_rate = std::stod(f[4]);
    r.mean_lap_time = number_or_nan(f[5]);
    r.mean_progress = std::stod(f[6]);
    r.train_steps = std::stoll(f[7]);
    r.status = f[8];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string summary_to_csv(std::span<const ResultRow> rows)
{
  struct Group
  {
    std::vector<double> progress;
    std::vector<double> completion;
    std::vector<double> lap_times;
  };
  std::map<std::tuple<std::string, std::string, double>, Group> groups;
  for (const auto & r : rows) {
    if (r.status != "ok") {
      continue;
    }
    auto & g = groups[{r.key.map, std::string(env::to_string(r.key.mode)), r.key.v_max}];
    g.progress.push_back(r.mean_progress);
    g.completion.push_back(r.completion_rate);
    if (std::isfinite(r.mean_lap_time)) {
      g.lap_times.push_back(r.mean_lap_time);
    }
  }
  auto mean = [](const std::vector<double> & xs) {
    if (xs.empty()) {
      return kNaN;
    }
    double s = 0.0;
    for (double x : xs) {
      s += x;
    }
    return s / static_cast<double>(xs.size());
  };
  csv::Writer w({"map", "reward_mode", "v_max", "n_seeds", "mean_completion_rate",
                 "mean_progress", "band_low_progress", "band_high_progress",
                 "trimmed_mean_progress", "mean_lap_time_s"});
  for (const auto & [k, g] : groups) {
    auto sorted = g.progress;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> band = sorted;
    if (band.size() >= 3) {
      band = std::vector<double>(sorted.begin() + 1, sorted.end() - 1);
    }
    w.text_row(
      {std::get<0>(k), std::get<1>(k), csv::format_number(std::get<2>(k)),
       std::to_string(g.progress.size()), number_or_empty(mean(g.completion)),
       number_or_empty(mean(g.progress)), number_or_empty(band.front()),
       number_or_empty(band.back()), number_or_empty(mean(band)),
       number_or_empty(mean(g.lap_times))});
  }
  return w.str();
}

namespace
{

config::ExperimentConfig cell_config(const config::ExperimentConfig & base, const CellKey & key)
{
  auto c = base;
  c.map = key.map;
  c.reward_mode = key.mode;
  c.env.vehicle.v_max = key.v_max;
  c.seeds = {key.seed};
  return c;
}

}  // namespace

ResultRow run_cell(
  const config::ExperimentConfig & base, const TrackBundle & track, const CellKey & key,
  const std::filesystem::path & dir, std::ostream * log)
{
  const auto c = cell_config(base, key);
  ResultRow row{key, 0.0, kNaN, 0.0, c.train_steps, "ok"};
  try {
    auto trained = run_training(c, track, key.seed, dir, log);
    auto summary = run_evaluation(c, track, agent_policy(trained.agent), key.seed, true);
    write_file(dir / "eval.csv", laps_to_csv(summary));
    const auto & trace = representative_trace(summary);
    write_file(dir / "trace.csv", env::trace_to_csv(trace));
    write_file(dir / "speed_slip.csv", export_speed_slip_profile(trace));
    row.completion_rate = summary.completion_rate;
    row.mean_lap_time = summary.mean_lap_time;
    row.mean_progress = summary.mean_progress;
  } catch (const std::exception & e) {
    std::string reason = e.what();
    std::replace(reason.begin(), reason.end(), ',', ';');
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    row.status = "failed: " + reason;
  }
  const std::vector<ResultRow> one{row};
  write_file(dir / "result.csv", results_to_csv(one));
  return row;
}

std::vector<ResultRow> run_matrix(
  const config::ExperimentConfig & base, const MatrixSpec & spec,
  const std::filesystem::path & out_dir, std::ostream * log)
{
  std::vector<CellKey> cells;
  for (const auto & m : spec.maps) {
    for (auto mode : spec.modes) {
      for (double v : spec.v_max) {
        for (auto seed : spec.seeds) {
          cells.push_back({m, mode, v, seed});
        }
      }
    }
  }
  if (cells.empty()) {
    throw HarnessError("matrix has no cells");
  }

  std::vector<std::optional<ResultRow>> results(cells.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto dir = out_dir / "cells" / cells[i].dir_name();
    if (
      std::filesystem::exists(dir / "result.csv") && std::filesystem::exists(dir / "config.txt")) {
      try {
        auto rows = load_results_csv(read_file(dir / "result.csv"));
        const bool same_config =
          read_file(dir / "config.txt") == config::to_text(cell_config(base, cells[i]));
        if (rows.size() == 1 && rows[0].status == "ok" && same_config) {
          results[i] = rows[0];
          continue;
        }
      } catch (const std::exception &) {
        // Unreadable results are recomputed.
      }
    }
    pending.push_back(i);
  }

  // Tracks depend on the map and, through the speed profile, on v_max.
  std::map<std::pair<std::string, double>, std::optional<TrackBundle>> tracks;
  std::map<std::pair<std::string, double>, std::string> track_errors;
  for (auto i : pending) {
    const auto k = std::make_pair(cells[i].map, cells[i].v_max);
    if (tracks.count(k) != 0 || track_errors.count(k) != 0) {
      continue;
    }
    try {
      tracks[k] = load_track(cell_config(base, cells[i]));
    } catch (const std::exception & e) {
      track_errors[k] = e.what();
    }
  }

  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= pending.size()) {
        return;
      }
      const auto i = pending[j];
      const auto & key = cells[i];
      const auto k = std::make_pair(key.map, key.v_max);
      if (log != nullptr) {
        std::lock_guard lock(log_mutex);
        *log << "cell " << key.dir_name() << "\n";
      }
      if (auto e = track_errors.find(k); e != track_errors.end()) {
        ResultRow row{key, 0.0, kNaN, 0.0, base.train_steps, "failed: track: " + e->second};
        std::replace(row.status.begin(), row.status.end(), ',', ';');
        results[i] = row;
        continue;
      }
      results[i] = run_cell(base, *tracks[k], key, out_dir / "cells" / key.dir_name(), nullptr);
      if (log != nullptr) {
        std::lock_guard lock(log_mutex);
        *log << "  " << key.dir_name() << ": " << results[i]->status << " progress "
             << results[i]->mean_progress << " completion " << results[i]->completion_rate
             << "\n";
      }
    }
  };
  const int workers = std::max(1, std::min<int>(spec.workers, static_cast<int>(pending.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back(worker);
    }
    for (auto & t : pool) {
      t.join();
    }
  }

  std::vector<ResultRow> rows;
  for (auto & r : results) {
    rows.push_back(*r);
  }
  write_file(out_dir / "results.csv", results_to_csv(rows));
  write_file(out_dir / "summary.csv", summary_to_csv(rows));
  return rows;
}

}  // namespace tal::harness
