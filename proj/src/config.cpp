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


#include "tal/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "tal/csv.hpp"

namespace tal::config
{
namespace
{

std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string & key, const std::string & v)
{
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
  return out;
}

std::int64_t to_int(const std::string & key, const std::string & v)
{
  std::int64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": not an integer: '" + v + "'");
  }
  return out;
}

std::size_t to_size(const std::string & key, const std::string & v)
{
  const auto n = to_int(key, v);
  if (n < 0) {
    throw ConfigError(key + ": must not be negative");
  }
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string & key, const std::string & v)
{
  if (v == "true" || v == "1") {
    return true;
  }
  if (v == "false" || v == "0") {
    return false;
  }
  throw ConfigError(key + ": not a boolean: '" + v + "'");
}

template <typename T>
std::vector<T> to_list(const std::string & key, const std::string & v, auto convert)
{
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      out.push_back(static_cast<T>(convert(key, item)));
    }
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T> & xs)
{
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out += (i ? "," : "") + std::to_string(xs[i]);
  }
  return out;
}

struct Binding
{
  std::string key;
  std::function<void(ExperimentConfig &, const std::string &)> set;
  std::function<std::string(const ExperimentConfig &)> get;
};

#define TAL_DOUBLE(KEY, FIELD)                                                                \
  Binding{KEY, [](ExperimentConfig & c, const std::string & v) { c.FIELD = to_double(KEY, v); }, \
          [](const ExperimentConfig & c) { return csv::format_number(c.FIELD); }}
#define TAL_INT(KEY, FIELD, TYPE)                                                          \
  Binding{KEY,                                                                             \
          [](ExperimentConfig & c, const std::string & v) {                                \
            c.FIELD = static_cast<TYPE>(to_int(KEY, v));                                    \
          },                                                                               \
          [](const ExperimentConfig & c) { return std::to_string(c.FIELD); }}
#define TAL_SIZE(KEY, FIELD)                                                                 \
  Binding{KEY, [](ExperimentConfig & c, const std::string & v) { c.FIELD = to_size(KEY, v); }, \
          [](const ExperimentConfig & c) { return std::to_string(c.FIELD); }}
#define TAL_BOOL(KEY, FIELD)                                                                 \
  Binding{KEY, [](ExperimentConfig & c, const std::string & v) { c.FIELD = to_bool(KEY, v); }, \
          [](const ExperimentConfig & c) { return std::string(c.FIELD ? "true" : "false"); }}
#define TAL_STRING(KEY, FIELD)                                                     \
  Binding{KEY, [](ExperimentConfig & c, const std::string & v) { c.FIELD = v; }, \
          [](const ExperimentConfig & c) { return c.FIELD; }}

const std::vector<Binding> & bindings()
{
  static const std::vector<Binding> table = {
    TAL_STRING("experiment.map", map),
    TAL_STRING("experiment.centerline", centerline),
    Binding{"experiment.reward_mode",
            [](ExperimentConfig & c, const std::string & v) {
              c.reward_mode = env::parse_reward_mode(v);
            },
            [](const ExperimentConfig & c) { return std::string(env::to_string(c.reward_mode)); }},
    TAL_INT("experiment.train_steps", train_steps, std::int64_t),
    Binding{"experiment.seeds",
            [](ExperimentConfig & c, const std::string & v) {
              c.seeds = to_list<std::uint64_t>("experiment.seeds", v, to_size);
            },
            [](const ExperimentConfig & c) { return join(c.seeds); }},
    TAL_INT("experiment.eval_episodes", eval_episodes, int),
    TAL_STRING("experiment.output_dir", output_dir),
    TAL_BOOL("experiment.train_random_start", train_random_start),

    TAL_BOOL("env.tal_normalized", env.tal_normalized),
    TAL_DOUBLE("env.shaping_scale", env.shaping_scale),
    TAL_DOUBLE("env.crash_reward", env.crash_reward),
    TAL_DOUBLE("env.lap_reward", env.lap_reward),
    TAL_DOUBLE("env.collision_radius", env.collision_radius),
    TAL_DOUBLE("env.step_budget_slack", env.step_budget_slack),

    TAL_DOUBLE("vehicle.mass", env.vehicle.mass),
    TAL_DOUBLE("vehicle.lf", env.vehicle.lf),
    TAL_DOUBLE("vehicle.lr", env.vehicle.lr),
    TAL_DOUBLE("vehicle.h_cg", env.vehicle.h_cg),
    TAL_DOUBLE("vehicle.c_sf", env.vehicle.c_sf),
    TAL_DOUBLE("vehicle.c_sr", env.vehicle.c_sr),
    TAL_DOUBLE("vehicle.mu", env.vehicle.mu),
    TAL_DOUBLE("vehicle.i_z", env.vehicle.i_z),
    TAL_DOUBLE("vehicle.steer_max", env.vehicle.steer_max),
    TAL_DOUBLE("vehicle.steer_rate_max", env.vehicle.steer_rate_max),
    TAL_DOUBLE("vehicle.a_max", env.vehicle.a_max),
    TAL_DOUBLE("vehicle.v_max", env.vehicle.v_max),
    TAL_DOUBLE("vehicle.v_min", env.vehicle.v_min),
    TAL_DOUBLE("vehicle.v_switch", env.vehicle.v_switch),
    TAL_DOUBLE("vehicle.speed_gain", env.vehicle.speed_gain),
    TAL_DOUBLE("vehicle.gravity", env.vehicle.gravity),

    TAL_INT("lidar.n_beams", env.lidar.n_beams, int),
    TAL_DOUBLE("lidar.fov", env.lidar.fov),
    TAL_DOUBLE("lidar.max_range", env.lidar.max_range),
    TAL_DOUBLE("lidar.noise_sigma", env.lidar.noise_sigma),

    TAL_DOUBLE("pursuit.lookahead_base", env.pursuit.lookahead_base),
    TAL_DOUBLE("pursuit.lookahead_gain", env.pursuit.lookahead_gain),
    TAL_DOUBLE("pursuit.lookahead_min", env.pursuit.lookahead_min),
    TAL_DOUBLE("pursuit.lookahead_max", env.pursuit.lookahead_max),

    TAL_DOUBLE("td3.gamma", td3.gamma),
    TAL_SIZE("td3.batch_size", td3.batch_size),
    TAL_DOUBLE("td3.explore_sigma", td3.explore_sigma),
    TAL_DOUBLE("td3.smooth_sigma", td3.smooth_sigma),
    TAL_DOUBLE("td3.noise_clip", td3.noise_clip),
    TAL_DOUBLE("td3.tau", td3.tau),
    TAL_INT("td3.policy_delay", td3.policy_delay, int),
    TAL_DOUBLE("td3.learning_rate", td3.learning_rate),
    Binding{"td3.hidden",
            [](ExperimentConfig & c, const std::string & v) {
              c.td3.hidden = to_list<std::size_t>("td3.hidden", v, to_size);
            },
            [](const ExperimentConfig & c) { return join(c.td3.hidden); }},
    TAL_SIZE("td3.buffer_capacity", td3.buffer_capacity),
    TAL_SIZE("td3.warmup_steps", td3.warmup_steps),

    TAL_DOUBLE("raceline.vehicle_width", raceline.vehicle_width),
    TAL_DOUBLE("raceline.margin", raceline.margin),
    TAL_DOUBLE("raceline.spacing", raceline.spacing),
    TAL_INT("raceline.max_iterations", raceline.max_iterations, int),
    TAL_DOUBLE("raceline.tolerance", raceline.tolerance),

    TAL_DOUBLE("centerline.spacing", extract.spacing),
    TAL_DOUBLE("centerline.trace_step", extract.trace_step),
    TAL_DOUBLE("centerline.smoothing_window", extract.smoothing_window),
  };
  return table;
}

#undef TAL_DOUBLE
#undef TAL_INT
#undef TAL_SIZE
#undef TAL_BOOL
#undef TAL_STRING

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text)
{
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const auto t = trim(line);
    if (t.empty()) {
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    out[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

raceline::RacelineParams ExperimentConfig::raceline_params() const
{
  auto p = raceline;
  p.limits.mu = env.vehicle.mu;
  p.limits.gravity = env.vehicle.gravity;
  p.limits.a_max = env.vehicle.a_max;
  p.limits.v_max = env.vehicle.v_max;
  p.limits.v_min = env.vehicle.v_min;
  return p;
}

void ExperimentConfig::validate() const
{
  env.validate();
  td3.validate();
  if (map.empty()) {
    throw ConfigError("experiment.map is empty");
  }
  if (seeds.empty()) {
    throw ConfigError("experiment.seeds must list at least one seed");
  }
  if (eval_episodes < 1) {
    throw ConfigError("experiment.eval_episodes must be at least 1");
  }
  if (train_steps < 0) {
    throw ConfigError("experiment.train_steps must not be negative");
  }
  if (td3.hidden.empty()) {
    throw ConfigError("td3.hidden must list at least one layer");
  }
}

void apply(ExperimentConfig & config, const std::map<std::string, std::string> & values)
{
  for (const auto & [key, value] : values) {
    const auto & table = bindings();
    const auto it = std::find_if(
      table.begin(), table.end(), [&](const Binding & b) { return b.key == key; });
    if (it == table.end()) {
      throw ConfigError("unknown config key: " + key);
    }
    try {
      it->set(config, value);
    } catch (const ConfigError &) {
      throw;
    } catch (const std::exception & e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
}

void apply_text(ExperimentConfig & config, std::string_view text)
{
  config::apply(config, parse_key_values(text));
}

void apply_file(ExperimentConfig & config, const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  apply_text(config, ss.str());
}

void apply_environment(ExperimentConfig & config)
{
  if (const char * dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
    config.output_dir = dir;
  }
}

std::string to_text(const ExperimentConfig & config)
{
  std::string out;
  for (const auto & b : bindings()) {
    out += b.key + " = " + b.get(config) + "\n";
  }
  return out;
}

std::vector<std::string> keys()
{
  std::vector<std::string> out;
  for (const auto & b : bindings()) {
    out.push_back(b.key);
  }
  return out;
}

}  // namespace tal::config
