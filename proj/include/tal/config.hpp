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
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tal/env.hpp"
#include "tal/raceline.hpp"
#include "tal/td3.hpp"
#include "tal/track.hpp"

namespace tal::config
{

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char * kOutputDirEnv = "TAL_OUTPUT_DIR";

/// `section.key = value` lines; '#' starts a comment. Later lines win.
std::map<std::string, std::string> parse_key_values(std::string_view text);

struct ExperimentConfig
{
  std::string map{"rounded_rect"};  // fixture name or path to a map .yaml
  std::string centerline;           // optional centerline CSV; extracted when empty
  env::RewardMode reward_mode{env::RewardMode::kTal};
  std::int64_t train_steps{30000};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int eval_episodes{20};
  std::string output_dir{"tal_out"};
  bool train_random_start{true};

  env::EnvConfig env{};
  td3::Td3Config td3{};
  raceline::RacelineParams raceline{};
  track::ExtractOptions extract{};

  /// Copies the vehicle limits into the raceline speed limits.
  raceline::RacelineParams raceline_params() const;
  double v_max() const { return env.vehicle.v_max; }
  void validate() const;
};

/// Applies every key to `config`; unknown keys and malformed values throw.
void apply(ExperimentConfig & config, const std::map<std::string, std::string> & values);
void apply_text(ExperimentConfig & config, std::string_view text);
void apply_file(ExperimentConfig & config, const std::string & path);
/// Replaces output_dir with $TAL_OUTPUT_DIR when it is set and non-empty.
void apply_environment(ExperimentConfig & config);

/// Every key in a fixed order, parseable by apply_text.
std::string to_text(const ExperimentConfig & config);
std::vector<std::string> keys();

}  // namespace tal::config
