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


#include "tal/td3.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace tal::td3
{
namespace
{

constexpr std::array<char, 8> kMagic = {'T', 'A', 'L', 'T', 'D', '3', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream & out, T value)
{
  std::array<char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  out.write(bytes.data(), sizeof(T));
}

template <typename T>
T get(std::istream & in)
{
  std::array<char, sizeof(T)> bytes{};
  if (!in.read(bytes.data(), sizeof(T))) {
    throw Td3Error("agent checkpoint truncated");
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

std::vector<std::size_t> layer_sizes(
  std::size_t in, const std::vector<std::size_t> & hidden, std::size_t out)
{
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

void Td3Config::validate() const
{
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("td3: gamma must lie in (0, 1)");
  }
  if (batch_size == 0 || policy_delay < 1 || buffer_capacity == 0) {
    throw std::invalid_argument("td3: batch size, policy delay and capacity must be positive");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("td3: tau must lie in [0, 1]");
  }
  if (explore_sigma < 0.0 || smooth_sigma < 0.0 || noise_clip < 0.0 || !(learning_rate > 0.0)) {
    throw std::invalid_argument("td3: noise scales must be >= 0 and the learning rate > 0");
  }
}

void Batch::push(const Transition & t)
{
  states.insert(states.end(), t.state.begin(), t.state.end());
  actions.insert(actions.end(), t.action.begin(), t.action.end());
  rewards.push_back(t.reward);
  next_states.insert(next_states.end(), t.next_state.begin(), t.next_state.end());
  done.push_back(t.done ? 1 : 0);
  ++size;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim)
: capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim)
{
  if (capacity == 0 || state_dim == 0 || action_dim == 0) {
    throw Td3Error("replay buffer dimensions must be positive");
  }
  states_.resize(capacity * state_dim);
  next_states_.resize(capacity * state_dim);
  actions_.resize(capacity * action_dim);
  rewards_.resize(capacity);
  done_.resize(capacity);
}

void ReplayBuffer::push(const Transition & t)
{
  if (t.state.size() != state_dim_ || t.next_state.size() != state_dim_ ||
      t.action.size() != action_dim_) {
    throw Td3Error("transition dimensions do not match the replay buffer");
  }
  if (!std::isfinite(t.reward)) {
    throw Td3Error("transition reward is not finite");
  }
  std::copy(t.state.begin(), t.state.end(), states_.begin() + cursor_ * state_dim_);
  std::copy(t.next_state.begin(), t.next_state.end(), next_states_.begin() + cursor_ * state_dim_);
  std::copy(t.action.begin(), t.action.end(), actions_.begin() + cursor_ * action_dim_);
  rewards_[cursor_] = t.reward;
  done_[cursor_] = t.done ? 1 : 0;
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Transition ReplayBuffer::slot(std::size_t k) const
{
  Transition t;
  t.state.assign(states_.begin() + k * state_dim_, states_.begin() + (k + 1) * state_dim_);
  t.next_state.assign(
    next_states_.begin() + k * state_dim_, next_states_.begin() + (k + 1) * state_dim_);
  t.action.assign(actions_.begin() + k * action_dim_, actions_.begin() + (k + 1) * action_dim_);
  t.reward = rewards_[k];
  t.done = done_[k] != 0;
  return t;
}

Transition ReplayBuffer::at(std::size_t i) const
{
  if (i >= size_) {
    throw Td3Error("replay buffer index out of range");
  }
  const std::size_t oldest = size_ < capacity_ ? 0 : cursor_;
  return slot((oldest + i) % capacity_);
}

Batch ReplayBuffer::sample(std::size_t n, Rng & rng) const
{
  if (size_ < n || size_ == 0) {
    throw Td3Error("replay buffer holds fewer transitions than the batch size");
  }
  Batch b;
  b.state_dim = state_dim_;
  b.action_dim = action_dim_;
  b.states.reserve(n * state_dim_);
  b.next_states.reserve(n * state_dim_);
  b.actions.reserve(n * action_dim_);
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = pick(rng);
    b.states.insert(
      b.states.end(), states_.begin() + k * state_dim_, states_.begin() + (k + 1) * state_dim_);
    b.next_states.insert(
      b.next_states.end(), next_states_.begin() + k * state_dim_,
      next_states_.begin() + (k + 1) * state_dim_);
    b.actions.insert(
      b.actions.end(), actions_.begin() + k * action_dim_,
      actions_.begin() + (k + 1) * action_dim_);
    b.rewards.push_back(rewards_[k]);
    b.done.push_back(done_[k]);
    ++b.size;
  }
  return b;
}

Td3Agent::Td3Agent(
  std::size_t state_dim, std::size_t action_dim, const Td3Config & config, Rng & init_rng)
: Td3Agent(
    nn::Mlp::fan_in_uniform(
      layer_sizes(state_dim, config.hidden, action_dim), nn::Activation::kTanh, init_rng),
    nn::Mlp::fan_in_uniform(
      layer_sizes(state_dim + action_dim, config.hidden, 1), nn::Activation::kIdentity, init_rng),
    nn::Mlp::fan_in_uniform(
      layer_sizes(state_dim + action_dim, config.hidden, 1), nn::Activation::kIdentity, init_rng),
    config)
{
}

Td3Agent::Td3Agent(nn::Mlp actor, nn::Mlp critic1, nn::Mlp critic2, const Td3Config & config)
: config_(config),
  state_dim_(actor.input_size()),
  action_dim_(actor.output_size()),
  actor_(std::move(actor)),
  critic1_(std::move(critic1)),
  critic2_(std::move(critic2))
{
  config_.validate();
  if (critic1_.input_size() != state_dim_ + action_dim_ || critic1_.output_size() != 1 ||
      !critic1_.same_architecture(critic2_)) {
    throw Td3Error("critic architecture does not match the actor dimensions");
  }
  actor_target_ = actor_;
  critic1_target_ = critic1_;
  critic2_target_ = critic2_;
  actor_adam_ = nn::AdamState(actor_.num_params(), config_.learning_rate);
  critic1_adam_ = nn::AdamState(critic1_.num_params(), config_.learning_rate);
  critic2_adam_ = nn::AdamState(critic2_.num_params(), config_.learning_rate);
}

std::vector<double> Td3Agent::concat(std::span<const double> s, std::span<const double> a) const
{
  std::vector<double> x(s.begin(), s.end());
  x.insert(x.end(), a.begin(), a.end());
  return x;
}

std::vector<double> Td3Agent::select_action(
  std::span<const double> state, bool explore, Rng & rng) const
{
  auto a = actor_.forward(state);
  if (explore && config_.explore_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, config_.explore_sigma);
    for (auto & x : a) {
      x += noise(rng);
    }
  }
  for (auto & x : a) {
    x = std::clamp(x, -1.0, 1.0);
  }
  return a;
}

std::vector<double> Td3Agent::draw_smoothing_noise(std::size_t n, Rng & rng) const
{
  std::vector<double> noise(n * action_dim_, 0.0);
  if (config_.smooth_sigma > 0.0) {
    std::normal_distribution<double> dist(0.0, config_.smooth_sigma);
    for (auto & x : noise) {
      x = dist(rng);
    }
  }
  return noise;
}

std::vector<double> Td3Agent::compute_targets(
  const Batch & batch, std::span<const double> smoothing_noise) const
{
  if (batch.size == 0) {
    throw Td3Error("compute_targets: empty batch");
  }
  if (smoothing_noise.size() != batch.size * action_dim_) {
    throw Td3Error("compute_targets: smoothing noise size mismatch");
  }
  std::vector<double> y(batch.size);
  for (std::size_t j = 0; j < batch.size; ++j) {
    auto a = actor_target_.forward(batch.next_state(j));
    for (std::size_t k = 0; k < action_dim_; ++k) {
      const double eps =
        std::clamp(smoothing_noise[j * action_dim_ + k], -config_.noise_clip, config_.noise_clip);
      a[k] = std::clamp(a[k] + eps, -1.0, 1.0);
    }
    const auto x = concat(batch.next_state(j), a);
    const double q1 = critic1_target_.forward(x)[0];
    const double q2 = critic2_target_.forward(x)[0];
    const double mask = batch.done[j] ? 0.0 : 1.0;
    y[j] = batch.rewards[j] + config_.gamma * mask * std::min(q1, q2);
  }
  return y;
}

std::vector<double> Td3Agent::compute_targets(const Batch & batch, Rng & rng) const
{
  return compute_targets(batch, draw_smoothing_noise(batch.size, rng));
}

double Td3Agent::critic_step(
  nn::Mlp & critic, nn::AdamState & adam, const Batch & batch, std::span<const double> y)
{
  std::vector<double> grads(critic.num_params(), 0.0);
  nn::Mlp::Tape tape;
  const double n = static_cast<double>(batch.size);
  double loss = 0.0;
  for (std::size_t j = 0; j < batch.size; ++j) {
    critic.forward(concat(batch.state(j), batch.action(j)), tape);
    const double diff = tape.output()[0] - y[j];
    loss += diff * diff;
    const double g = 2.0 * diff / n;
    critic.backward(tape, std::span<const double>(&g, 1), grads, {});
  }
  loss /= n;
  if (!std::isfinite(loss)) {
    throw Td3Error("critic loss is not finite");
  }
  adam_step(critic.params(), grads, adam);
  return loss;
}

double Td3Agent::actor_step(const Batch & batch)
{
  std::vector<double> grads(actor_.num_params(), 0.0);
  std::vector<double> input_grad(state_dim_ + action_dim_);
  std::vector<double> out_grad(action_dim_);
  nn::Mlp::Tape actor_tape;
  nn::Mlp::Tape critic_tape;
  const double n = static_cast<double>(batch.size);
  const double one = 1.0;
  double objective = 0.0;
  for (std::size_t j = 0; j < batch.size; ++j) {
    actor_.forward(batch.state(j), actor_tape);
    critic1_.forward(concat(batch.state(j), actor_tape.output()), critic_tape);
    objective += critic_tape.output()[0];
    critic1_.backward(critic_tape, std::span<const double>(&one, 1), {}, input_grad);
    // Ascent on Q: descend on -Q / N.
    for (std::size_t k = 0; k < action_dim_; ++k) {
      out_grad[k] = -input_grad[state_dim_ + k] / n;
    }
    actor_.backward(actor_tape, out_grad, grads, {});
  }
  objective /= n;
  if (!std::isfinite(objective)) {
    throw Td3Error("actor objective is not finite");
  }
  adam_step(actor_.params(), grads, actor_adam_);
  return objective;
}

UpdateInfo Td3Agent::update_on_batch(const Batch & batch, std::span<const double> smoothing_noise)
{
  const auto y = compute_targets(batch, smoothing_noise);
  UpdateInfo info;
  info.critic1_loss = critic_step(critic1_, critic1_adam_, batch, y);
  info.critic2_loss = critic_step(critic2_, critic2_adam_, batch, y);
  ++update_count_;
  if (update_count_ % config_.policy_delay == 0) {
    info.actor_objective = actor_step(batch);
    info.actor_updated = true;
    nn::soft_update(actor_target_, actor_, config_.tau);
    nn::soft_update(critic1_target_, critic1_, config_.tau);
    nn::soft_update(critic2_target_, critic2_, config_.tau);
  }
  return info;
}

UpdateInfo Td3Agent::update(const ReplayBuffer & buffer, Rng & rng)
{
  const Batch batch = buffer.sample(config_.batch_size, rng);
  const auto noise = draw_smoothing_noise(batch.size, rng);
  return update_on_batch(batch, noise);
}

void Td3Agent::save(std::ostream & out) const
{
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, state_dim_);
  put<std::uint64_t>(out, action_dim_);
  put<double>(out, config_.gamma);
  put<std::uint64_t>(out, config_.batch_size);
  put<double>(out, config_.explore_sigma);
  put<double>(out, config_.smooth_sigma);
  put<double>(out, config_.noise_clip);
  put<double>(out, config_.tau);
  put<std::int32_t>(out, config_.policy_delay);
  put<double>(out, config_.learning_rate);
  put<std::uint64_t>(out, config_.buffer_capacity);
  put<std::uint64_t>(out, config_.warmup_steps);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(config_.hidden.size()));
  for (auto h : config_.hidden) {
    put<std::uint64_t>(out, h);
  }
  put<std::int64_t>(out, update_count_);
  for (const auto * net :
       {&actor_, &actor_target_, &critic1_, &critic2_, &critic1_target_, &critic2_target_}) {
    nn::save_mlp(out, *net);
  }
  if (!out) {
    throw Td3Error("failed writing agent checkpoint");
  }
}

Td3Agent Td3Agent::load(std::istream & in)
{
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Td3Error("not an agent checkpoint");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) {
    throw Td3Error("unsupported agent checkpoint version " + std::to_string(version));
  }
  const auto state_dim = static_cast<std::size_t>(get<std::uint64_t>(in));
  const auto action_dim = static_cast<std::size_t>(get<std::uint64_t>(in));
  Td3Config c;
  c.gamma = get<double>(in);
  c.batch_size = static_cast<std::size_t>(get<std::uint64_t>(in));
  c.explore_sigma = get<double>(in);
  c.smooth_sigma = get<double>(in);
  c.noise_clip = get<double>(in);
  c.tau = get<double>(in);
  c.policy_delay = get<std::int32_t>(in);
  c.learning_rate = get<double>(in);
  c.buffer_capacity = static_cast<std::size_t>(get<std::uint64_t>(in));
  c.warmup_steps = static_cast<std::size_t>(get<std::uint64_t>(in));
  const auto n_hidden = get<std::uint32_t>(in);
  if (n_hidden > 64) {
    throw Td3Error("implausible hidden layer count in agent checkpoint");
  }
  c.hidden.resize(n_hidden);
  for (auto & h : c.hidden) {
    h = static_cast<std::size_t>(get<std::uint64_t>(in));
  }
  const auto count = get<std::int64_t>(in);

  nn::Mlp actor(layer_sizes(state_dim, c.hidden, action_dim), nn::Activation::kTanh);
  nn::Mlp critic(layer_sizes(state_dim + action_dim, c.hidden, 1), nn::Activation::kIdentity);
  Td3Agent agent(actor, critic, critic, c);
  for (auto * net : {&agent.actor_, &agent.actor_target_, &agent.critic1_, &agent.critic2_,
                     &agent.critic1_target_, &agent.critic2_target_}) {
    nn::load_mlp_into(in, *net);
  }
  agent.update_count_ = count;
  return agent;
}

}  // namespace tal::td3
