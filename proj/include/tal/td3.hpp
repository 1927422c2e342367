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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "tal/nn.hpp"
#include "tal/rng.hpp"

namespace tal::td3
{

class Td3Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct Td3Config
{
  double gamma{0.99};
  std::size_t batch_size{100};
  double explore_sigma{0.1};
  double smooth_sigma{0.2};
  double noise_clip{0.5};
  double tau{0.005};
  int policy_delay{2};
  double learning_rate{1e-3};
  std::vector<std::size_t> hidden{100, 100};
  std::size_t buffer_capacity{100000};
  std::size_t warmup_steps{1000};

  void validate() const;
};

struct Transition
{
  std::vector<double> state;
  std::vector<double> action;  // normalized, [-1, 1] per component
  double reward{0.0};
  std::vector<double> next_state;
  bool done{false};
};

/// Transitions laid out contiguously, one row per sample.
struct Batch
{
  std::size_t size{0};
  std::size_t state_dim{0};
  std::size_t action_dim{0};
  std::vector<double> states;
  std::vector<double> actions;
  std::vector<double> rewards;
  std::vector<double> next_states;
  std::vector<std::uint8_t> done;

  std::span<const double> state(std::size_t j) const
  {
    return {states.data() + j * state_dim, state_dim};
  }
  std::span<const double> action(std::size_t j) const
  {
    return {actions.data() + j * action_dim, action_dim};
  }
  std::span<const double> next_state(std::size_t j) const
  {
    return {next_states.data() + j * state_dim, state_dim};
  }
  void push(const Transition & t);
};

class ReplayBuffer
{
public:
  ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim);

  void push(const Transition & t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t action_dim() const { return action_dim_; }
  /// i-th stored transition, oldest first.
  Transition at(std::size_t i) const;
  /// n uniform draws with replacement.
  Batch sample(std::size_t n, Rng & rng) const;

private:
  Transition slot(std::size_t k) const;

  std::size_t capacity_;
  std::size_t state_dim_;
  std::size_t action_dim_;
  std::size_t size_{0};
  std::size_t cursor_{0};
  std::vector<double> states_;
  std::vector<double> actions_;
  std::vector<double> rewards_;
  std::vector<double> next_states_;
  std::vector<std::uint8_t> done_;
};

struct UpdateInfo
{
  double critic1_loss{0.0};
  double critic2_loss{0.0};
  bool actor_updated{false};
  double actor_objective{0.0};  // mean Q1(s, mu(s)) when the actor moved
};

class Td3Agent
{
public:
  Td3Agent(std::size_t state_dim, std::size_t action_dim, const Td3Config & config, Rng & init_rng);
  /// Builds an agent around given networks; targets start as copies.
  Td3Agent(nn::Mlp actor, nn::Mlp critic1, nn::Mlp critic2, const Td3Config & config);

  std::vector<double> select_action(std::span<const double> state, bool explore, Rng & rng) const;

  /// Clipped double-Q targets. `smoothing_noise` holds the raw Gaussian draws
  /// (size * action_dim), clipped to +-noise_clip here.
  std::vector<double> compute_targets(
    const Batch & batch, std::span<const double> smoothing_noise) const;
  std::vector<double> compute_targets(const Batch & batch, Rng & rng) const;

  UpdateInfo update(const ReplayBuffer & buffer, Rng & rng);
  UpdateInfo update_on_batch(const Batch & batch, std::span<const double> smoothing_noise);

  /// N(0, smooth_sigma) draws in the order compute_targets consumes them.
  std::vector<double> draw_smoothing_noise(std::size_t n, Rng & rng) const;

  const Td3Config & config() const { return config_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t action_dim() const { return action_dim_; }
  std::int64_t update_count() const { return update_count_; }

  const nn::Mlp & actor() const { return actor_; }
  const nn::Mlp & actor_target() const { return actor_target_; }
  const nn::Mlp & critic1() const { return critic1_; }
  const nn::Mlp & critic2() const { return critic2_; }
  const nn::Mlp & critic1_target() const { return critic1_target_; }
  const nn::Mlp & critic2_target() const { return critic2_target_; }

  /// Versioned bundle: dimensions, hyperparameters, update counter and the
  /// six networks.
  void save(std::ostream & out) const;
  static Td3Agent load(std::istream & in);

private:
  double critic_step(
    nn::Mlp & critic, nn::AdamState & adam, const Batch & batch, std::span<const double> y);
  double actor_step(const Batch & batch);
  std::vector<double> concat(std::span<const double> s, std::span<const double> a) const;

  Td3Config config_;
  std::size_t state_dim_;
  std::size_t action_dim_;
  nn::Mlp actor_;
  nn::Mlp actor_target_;
  nn::Mlp critic1_;
  nn::Mlp critic2_;
  nn::Mlp critic1_target_;
  nn::Mlp critic2_target_;
  nn::AdamState actor_adam_;
  nn::AdamState critic1_adam_;
  nn::AdamState critic2_adam_;
  std::int64_t update_count_{0};
};

}  // namespace tal::td3
