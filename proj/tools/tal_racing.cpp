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


// Command line front end: raceline, race-classic, train, evaluate, matrix,
// export. Results go to stdout as JSON; failures print a JSON error object on
// stderr and exit nonzero.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tal/config.hpp"
#include "tal/env.hpp"
#include "tal/fixtures.hpp"
#include "tal/harness.hpp"
#include "tal/raceline.hpp"
#include "tal/td3.hpp"
#include "tal/track.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tal;

namespace
{

struct Common
{
  std::string config_file;
  std::vector<std::string> sets;
  std::string out;
  std::string map;
  std::string centerline;
  std::string reward;
  double v_max{0.0};
  std::int64_t steps{-1};
  std::vector<std::uint64_t> seeds;
  int episodes{0};
};

void add_common(CLI::App * cmd, Common & c)
{
  cmd->add_option("-c,--config", c.config_file, "flat key = value config file");
  cmd->add_option("--set", c.sets, "override one key, e.g. --set td3.tau=0.01");
  cmd->add_option("-o,--out", c.out, "output directory (overrides $TAL_OUTPUT_DIR)");
  cmd->add_option("--map", c.map, "fixture (annulus, rounded_rect, stadium, aut, esp) or map .yaml");
  cmd->add_option("--centerline", c.centerline, "centerline CSV; extracted from the map if unset");
  cmd->add_option("--reward", c.reward, "tal | baseline");
  cmd->add_option("--v-max", c.v_max, "speed cap, m/s");
  cmd->add_option("--steps", c.steps, "training steps");
  cmd->add_option("--seed", c.seeds, "seed(s)");
  cmd->add_option("--episodes", c.episodes, "evaluation episodes");
}

// defaults < config file < $TAL_OUTPUT_DIR < flags
config::ExperimentConfig resolve(const Common & c)
{
  config::ExperimentConfig cfg;
  if (!c.config_file.empty()) {
    config::apply_file(cfg, c.config_file);
  }
  config::apply_environment(cfg);
  std::string overrides;
  for (const auto & s : c.sets) {
    overrides += s + "\n";
  }
  config::apply_text(cfg, overrides);
  if (!c.out.empty()) {
    cfg.output_dir = c.out;
  }
  if (!c.map.empty()) {
    cfg.map = c.map;
  }
  if (!c.centerline.empty()) {
    cfg.centerline = c.centerline;
  }
  if (!c.reward.empty()) {
    cfg.reward_mode = env::parse_reward_mode(c.reward);
  }
  if (c.v_max > 0.0) {
    cfg.env.vehicle.v_max = c.v_max;
  }
  if (c.steps >= 0) {
    cfg.train_steps = c.steps;
  }
  if (!c.seeds.empty()) {
    cfg.seeds = c.seeds;
  }
  if (c.episodes > 0) {
    cfg.eval_episodes = c.episodes;
  }
  cfg.validate();
  return cfg;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json eval_json(const harness::EvalSummary & s)
{
  return {{"completion_rate", s.completion_rate},
          {"mean_lap_time_s", nullable(s.mean_lap_time)},
          {"mean_progress", s.mean_progress},
          {"episodes", s.laps.size()}};
}

void write_eval(const fs::path & dir, const harness::EvalSummary & s)
{
  harness::write_file(dir / "eval.csv", harness::laps_to_csv(s));
  const auto & trace = harness::representative_trace(s);
  harness::write_file(dir / "trace.csv", env::trace_to_csv(trace));
  harness::write_file(dir / "speed_slip.csv", harness::export_speed_slip_profile(trace));
}

json cmd_raceline(const config::ExperimentConfig & cfg)
{
  const auto t = harness::load_track(cfg);
  const fs::path dir = cfg.output_dir;
  harness::write_file(dir / "centerline.csv", track::centerline_to_csv(t.centerline));
  harness::write_file(dir / "raceline.csv", raceline::raceline_to_csv(t.raceline));
  const auto violations = raceline::check_trajectory(t.raceline, cfg.raceline_params().limits);
  return {{"map", t.name},
          {"centerline_length_m", t.centerline.total_length},
          {"raceline_length_m", t.raceline.total_length},
          {"predicted_lap_time_s", raceline::predicted_lap_time(t.raceline)},
          {"violations", violations},
          {"outputs", {(dir / "centerline.csv").string(), (dir / "raceline.csv").string()}}};
}

json cmd_race_classic(const config::ExperimentConfig & cfg)
{
  const auto t = harness::load_track(cfg);
  const auto s =
    harness::run_evaluation(cfg, t, harness::classic_policy(), cfg.seeds.front(), true);
  const fs::path dir = cfg.output_dir;
  write_eval(dir, s);
  harness::write_file(dir / "raceline.csv", raceline::raceline_to_csv(t.raceline));
  auto out = eval_json(s);
  out["map"] = t.name;
  out["predicted_lap_time_s"] = raceline::predicted_lap_time(t.raceline);
  return out;
}

json cmd_train(const config::ExperimentConfig & cfg)
{
  const auto t = harness::load_track(cfg);
  const fs::path dir = cfg.output_dir;
  const auto seed = cfg.seeds.front();
  auto r = harness::run_training(cfg, t, seed, dir, &std::cerr);
  const auto s = harness::run_evaluation(cfg, t, harness::agent_policy(r.agent), seed, true);
  write_eval(dir, s);
  auto out = eval_json(s);
  out["map"] = t.name;
  out["seed"] = seed;
  out["training_episodes"] = r.curve.size();
  out["updates"] = r.agent.update_count();
  out["checkpoint"] = (dir / "agent.ckpt").string();
  return out;
}

json cmd_evaluate(const config::ExperimentConfig & cfg, const std::string & checkpoint)
{
  const auto t = harness::load_track(cfg);
  std::istringstream in(harness::read_file(checkpoint));
  const auto agent = td3::Td3Agent::load(in);
  const auto s =
    harness::run_evaluation(cfg, t, harness::agent_policy(agent), cfg.seeds.front(), true);
  write_eval(cfg.output_dir, s);
  auto out = eval_json(s);
  out["map"] = t.name;
  return out;
}

json cmd_matrix(
  const config::ExperimentConfig & cfg, const std::vector<std::string> & maps,
  const std::vector<std::string> & modes, const std::vector<double> & speeds, int workers)
{
  harness::MatrixSpec spec;
  spec.maps = maps.empty() ? std::vector<std::string>{cfg.map} : maps;
  for (const auto & m : modes.empty() ? std::vector<std::string>{"tal", "baseline"} : modes) {
    spec.modes.push_back(env::parse_reward_mode(m));
  }
  spec.v_max = speeds.empty() ? std::vector<double>{cfg.v_max()} : speeds;
  spec.seeds = cfg.seeds;
  spec.workers = workers;
  const auto rows = harness::run_matrix(cfg, spec, cfg.output_dir, &std::cerr);
  std::size_t failed = 0;
  for (const auto & r : rows) {
    failed += r.status == "ok" ? 0 : 1;
  }
  return {{"cells", rows.size()},
          {"failed", failed},
          {"results", (fs::path(cfg.output_dir) / "results.csv").string()},
          {"summary", (fs::path(cfg.output_dir) / "summary.csv").string()}};
}

json cmd_export(
  const config::ExperimentConfig & cfg, const std::string & trace, const std::string & fixture)
{
  const fs::path dir = cfg.output_dir;
  json out = json::object();
  if (!trace.empty()) {
    const auto rows = env::load_trace_csv(harness::read_file(trace));
    harness::write_file(dir / "speed_slip.csv", harness::export_speed_slip_profile(rows));
    out["speed_slip"] = (dir / "speed_slip.csv").string();
  }
  if (!fixture.empty()) {
    const auto f = fixtures::by_name(fixture);
    fs::create_directories(dir);
    track::save_map_files(f.map, dir / (fixture + ".yaml"));
    out["map"] = (dir / (fixture + ".yaml")).string();
  }
  if (out.empty()) {
    throw std::invalid_argument("export needs --trace and/or --fixture");
  }
  return out;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Trajectory-aided learning and classical planning for F1TENTH-scale racing"};
  app.require_subcommand(1);

  Common common;
  std::string checkpoint;
  std::vector<std::string> maps;
  std::vector<std::string> modes;
  std::vector<double> speeds;
  int workers = 1;
  std::string trace;
  std::string fixture;

  auto * raceline_cmd = app.add_subcommand("raceline", "build and export the racing line");
  auto * classic_cmd = app.add_subcommand("race-classic", "evaluate the classical planner");
  auto * train_cmd = app.add_subcommand("train", "train one TD3 agent, then evaluate it");
  auto * eval_cmd = app.add_subcommand("evaluate", "evaluate a saved agent");
  auto * matrix_cmd = app.add_subcommand("matrix", "map x reward x v_max x seed sweep");
  auto * export_cmd = app.add_subcommand("export", "speed/slip profile or fixture map files");
  for (auto * cmd : {raceline_cmd, classic_cmd, train_cmd, eval_cmd, matrix_cmd, export_cmd}) {
    add_common(cmd, common);
  }
  eval_cmd->add_option("--checkpoint", checkpoint, "agent.ckpt written by train")->required();
  matrix_cmd->add_option("--maps", maps, "maps (default: --map)");
  matrix_cmd->add_option("--modes", modes, "reward modes (default: tal baseline)");
  matrix_cmd->add_option("--speeds", speeds, "v_max values (default: --v-max)");
  matrix_cmd->add_option("--workers", workers, "concurrent cells")->check(CLI::PositiveNumber);
  export_cmd->add_option("--trace", trace, "episode trace CSV to convert");
  export_cmd->add_option("--fixture", fixture, "fixture to write as map yaml + image");

  std::string command = "tal_racing";
  try {
    app.parse(argc, argv);
    const auto * sub = app.get_subcommands().front();
    command = sub->get_name();
    const auto cfg = resolve(common);
    json out;
    if (sub == raceline_cmd) {
      out = cmd_raceline(cfg);
    } else if (sub == classic_cmd) {
      out = cmd_race_classic(cfg);
    } else if (sub == train_cmd) {
      out = cmd_train(cfg);
    } else if (sub == eval_cmd) {
      out = cmd_evaluate(cfg, checkpoint);
    } else if (sub == matrix_cmd) {
      out = cmd_matrix(cfg, maps, modes, speeds, workers);
    } else {
      out = cmd_export(cfg, trace, fixture);
    }
    out["command"] = command;
    std::cout << out.dump(2) << "\n";
    return 0;
  } catch (const CLI::ParseError & e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);
    }
    std::cerr << json{{"error", e.what()}, {"kind", "usage"}, {"command", command}}.dump() << "\n";
    return 2;
  } catch (const std::exception & e) {
    std::cerr << json{{"error", e.what()}, {"kind", "runtime"}, {"command", command}}.dump()
              << "\n";
    return 1;
  }
}
