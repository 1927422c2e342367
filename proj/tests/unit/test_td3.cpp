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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"

namespace tal::td3
{
namespace
{

Transition make_transition(double tag, bool done = false)
{
  return {{tag, tag + 0.1}, {tag / 100.0}, tag, {tag + 1.0, tag + 1.1}, done};
}

void expect_same(const nn::Mlp & a, const nn::Mlp & b)
{
  ASSERT_EQ(a.num_params(), b.num_params());
  for (std::size_t i = 0; i < a.num_params(); ++i) {
    ASSERT_EQ(a.params()[i], b.params()[i]) << i;
  }
}

double max_abs_diff(const nn::Mlp & a, const nn::Mlp & b)
{
  double d = 0.0;
  for (std::size_t i = 0; i < a.num_params(); ++i) {
    d = std::max(d, std::abs(a.params()[i] - b.params()[i]));
  }
  return d;
}

ReplayBuffer random_buffer(std::size_t n, std::size_t sd, std::size_t ad, Rng & rng)
{
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ReplayBuffer buf(n, sd, ad);
  for (std::size_t i = 0; i < n; ++i) {
    Transition t;
    t.state.resize(sd);
    t.next_state.resize(sd);
    t.action.resize(ad);
    for (auto & x : t.state) {
      x = u(rng);
    }
    for (auto & x : t.next_state) {
      x = u(rng);
    }
    for (auto & x : t.action) {
      x = u(rng);
    }
    t.reward = u(rng);
    t.done = i % 7 == 0;
    buf.push(t);
  }
  return buf;
}

TEST(ReplayBuffer, StoresTransitionsExactly)
{
  ReplayBuffer buf(4, 2, 1);
  buf.push(make_transition(3.0, true));
  ASSERT_EQ(buf.size(), 1u);
  const auto t = buf.at(0);
  EXPECT_EQ(t.state, (std::vector<double>{3.0, 3.1}));
  EXPECT_EQ(t.action, (std::vector<double>{0.03}));
  EXPECT_EQ(t.reward, 3.0);
  EXPECT_EQ(t.next_state, (std::vector<double>{4.0, 4.1}));
  EXPECT_TRUE(t.done);
}

TEST(ReplayBuffer, RingOverwritesOldest)
{
  ReplayBuffer buf(3, 2, 1);
  for (int i = 0; i < 5; ++i) {
    buf.push(make_transition(i));
  }
  ASSERT_EQ(buf.size(), 3u);
  EXPECT_EQ(buf.capacity(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(buf.at(i).reward, static_cast<double>(i + 2));
  }
  EXPECT_THROW(buf.at(3), Td3Error);
}

TEST(ReplayBuffer, RejectsBadTransitions)
{
  ReplayBuffer buf(3, 2, 1);
  EXPECT_THROW(buf.push({{1.0}, {0.0}, 0.0, {1.0, 2.0}, false}), Td3Error);
  EXPECT_THROW(buf.push({{1.0, 2.0}, {0.0, 0.0}, 0.0, {1.0, 2.0}, false}), Td3Error);
  EXPECT_THROW(buf.push({{1.0, 2.0}, {0.0}, NAN, {1.0, 2.0}, false}), Td3Error);
  EXPECT_EQ(buf.size(), 0u);
  EXPECT_THROW(ReplayBuffer(0, 2, 1), Td3Error);
}

// Chi-square over 10 slots; 27.88 is the 0.999 quantile with 9 dof.
TEST(ReplayBuffer, SamplingIsUniform)
{
  ReplayBuffer buf(10, 2, 1);
  for (int i = 0; i < 10; ++i) {
    buf.push(make_transition(i));
  }
  Rng rng(1);
  const std::size_t n = 50000;
  std::vector<double> counts(10, 0.0);
  for (std::size_t k = 0; k < n / 10; ++k) {
    const auto b = buf.sample(10, rng);
    ASSERT_EQ(b.size, 10u);
    for (double r : b.rewards) {
      counts[static_cast<std::size_t>(r)] += 1.0;
    }
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(n) / 10.0;
  for (double c : counts) {
    chi2 += (c - expected) * (c - expected) / expected;
  }
  EXPECT_LT(chi2, 27.88);
}

TEST(ReplayBuffer, SampleRowsStayAligned)
{
  ReplayBuffer buf(10, 2, 1);
  for (int i = 0; i < 10; ++i) {
    buf.push(make_transition(i, i % 2 == 0));
  }
  Rng rng(2);
  const auto b = buf.sample(10, rng);
  for (std::size_t j = 0; j < b.size; ++j) {
    const double tag = b.rewards[j];
    EXPECT_EQ(b.state(j)[0], tag);
    EXPECT_EQ(b.next_state(j)[1], tag + 1.1);
    EXPECT_EQ(b.action(j)[0], tag / 100.0);
    EXPECT_EQ(b.done[j] != 0, static_cast<int>(tag) % 2 == 0);
  }
}

TEST(ReplayBuffer, SamplingIsSeeded)
{
  Rng fill(3);
  const auto buf = random_buffer(50, 3, 2, fill);
  Rng a(9);
  Rng b(9);
  EXPECT_EQ(buf.sample(20, a).states, buf.sample(20, b).states);
}

TEST(ReplayBuffer, SingleEntryAndInsufficient)
{
  ReplayBuffer buf(5, 2, 1);
  Rng rng(4);
  EXPECT_THROW(buf.sample(1, rng), Td3Error);
  buf.push(make_transition(7.0));
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(buf.sample(1, rng).rewards, std::vector<double>{7.0});
  }
  // Sampling needs at least a batch worth of stored transitions.
  EXPECT_THROW(buf.sample(2, rng), Td3Error);
}

// Zero networks: the actor outputs tanh(0) = 0 for every state.
Td3Agent zero_agent(Td3Config cfg)
{
  return Td3Agent(
    nn::Mlp({2, 4, 1}, nn::Activation::kTanh), nn::Mlp({3, 1}, nn::Activation::kIdentity),
    nn::Mlp({3, 1}, nn::Activation::kIdentity), cfg);
}

TEST(SelectAction, GreedyIsDeterministic)
{
  Rng init(5);
  const Td3Agent agent(4, 2, Td3Config{}, init);
  Rng a(1);
  Rng b(2);
  const std::vector<double> s{0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(agent.select_action(s, false, a), agent.select_action(s, false, b));
  EXPECT_EQ(agent.select_action(s, false, a), agent.actor().forward(s));
}

TEST(SelectAction, ZeroSigmaExplorationIsGreedy)
{
  Td3Config cfg;
  cfg.explore_sigma = 0.0;
  Rng init(6);
  const Td3Agent agent(4, 2, cfg, init);
  Rng rng(3);
  const std::vector<double> s{0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(agent.select_action(s, true, rng), agent.select_action(s, false, rng));
}

TEST(SelectAction, ExplorationNoiseHasConfiguredSpread)
{
  const auto agent = zero_agent(Td3Config{});
  Rng rng(4);
  const std::vector<double> s{0.5, -0.5};
  double sum = 0.0;
  double sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double a = agent.select_action(s, true, rng)[0];
    EXPECT_GE(a, -1.0);
    EXPECT_LE(a, 1.0);
    sum += a;
    sq += a * a;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_GE(sd, 0.08);
  EXPECT_LE(sd, 0.12);
}

Batch one_sample(double reward, bool done)
{
  Batch b;
  b.state_dim = 2;
  b.action_dim = 1;
  b.push({{0.3, 0.4}, {0.2}, reward, {0.5, 0.6}, done});
  return b;
}

TEST(Targets, TerminalIsReward)
{
  Rng init(7);
  Td3Config cfg;
  const Td3Agent agent(2, 1, cfg, init);
  const auto y = agent.compute_targets(one_sample(0.75, true), std::vector<double>{0.3});
  EXPECT_EQ(y[0], 0.75);
}

// Q1'(s, a) = a and Q2'(s, a) = 5 with a zero actor: the target sees the
// clipped smoothing noise directly.
TEST(Targets, HandComputedWithClippedNoise)
{
  nn::Mlp q1({3, 1}, nn::Activation::kIdentity);
  q1.weight(0, 0, 2) = 1.0;
  nn::Mlp q2({3, 1}, nn::Activation::kIdentity);
  q2.bias(0, 0) = 5.0;
  Td3Config cfg;
  cfg.gamma = 0.9;
  const Td3Agent agent(nn::Mlp({2, 4, 1}, nn::Activation::kTanh), q1, q2, cfg);
  const auto b = one_sample(0.5, false);
  EXPECT_DOUBLE_EQ(agent.compute_targets(b, std::vector<double>{-0.3})[0], 0.5 - 0.9 * 0.3);
  EXPECT_DOUBLE_EQ(agent.compute_targets(b, std::vector<double>{2.0})[0], 0.5 + 0.9 * 0.5);
  EXPECT_DOUBLE_EQ(agent.compute_targets(b, std::vector<double>{-9.0})[0], 0.5 - 0.9 * 0.5);
  EXPECT_THROW(agent.compute_targets(b, std::vector<double>{0.1, 0.2}), Td3Error);
}

TEST(Targets, SmallerCriticWins)
{
  nn::Mlp q1({3, 1}, nn::Activation::kIdentity);
  q1.bias(0, 0) = 2.0;
  nn::Mlp q2({3, 1}, nn::Activation::kIdentity);
  q2.bias(0, 0) = -1.0;
  Td3Config cfg;
  cfg.gamma = 0.5;
  const Td3Agent a(nn::Mlp({2, 4, 1}, nn::Activation::kTanh), q1, q2, cfg);
  const Td3Agent b(nn::Mlp({2, 4, 1}, nn::Activation::kTanh), q2, q1, cfg);
  const auto batch = one_sample(1.0, false);
  const std::vector<double> noise{0.0};
  EXPECT_DOUBLE_EQ(a.compute_targets(batch, noise)[0], 0.5);
  EXPECT_DOUBLE_EQ(b.compute_targets(batch, noise)[0], 0.5);
}

TEST(Targets, RandomNetworksNeverExceedEitherCritic)
{
  Rng init(8);
  const Td3Agent agent(3, 2, Td3Config{}, init);
  Rng fill(9);
  const auto buf = random_buffer(64, 3, 2, fill);
  Rng rng(10);
  const auto batch = buf.sample(64, rng);
  const auto noise = agent.draw_smoothing_noise(batch.size, rng);
  const auto y = agent.compute_targets(batch, noise);
  for (std::size_t j = 0; j < batch.size; ++j) {
    if (batch.done[j]) {
      continue;
    }
    auto a = agent.actor_target().forward(batch.next_state(j));
    for (std::size_t k = 0; k < 2; ++k) {
      a[k] = std::clamp(a[k] + std::clamp(noise[j * 2 + k], -0.5, 0.5), -1.0, 1.0);
    }
    std::vector<double> x(batch.next_state(j).begin(), batch.next_state(j).end());
    x.insert(x.end(), a.begin(), a.end());
    const double bound1 = batch.rewards[j] + 0.99 * agent.critic1_target().forward(x)[0];
    const double bound2 = batch.rewards[j] + 0.99 * agent.critic2_target().forward(x)[0];
    EXPECT_LE(y[j], bound1 + 1e-12);
    EXPECT_LE(y[j], bound2 + 1e-12);
  }
}

TEST(Update, ActorWaitsForPolicyDelay)
{
  Rng init(11);
  Td3Config cfg;
  cfg.batch_size = 16;
  Td3Agent agent(3, 2, cfg, init);
  const auto actor0 = agent.actor();
  const auto target0 = agent.critic1_target();
  Rng fill(12);
  const auto buf = random_buffer(64, 3, 2, fill);
  Rng rng(13);

  auto info = agent.update(buf, rng);
  EXPECT_FALSE(info.actor_updated);
  expect_same(agent.actor(), actor0);
  expect_same(agent.critic1_target(), target0);
  EXPECT_GT(max_abs_diff(agent.critic1(), target0), 0.0);

  info = agent.update(buf, rng);
  EXPECT_TRUE(info.actor_updated);
  EXPECT_GT(max_abs_diff(agent.actor(), actor0), 0.0);
  EXPECT_GT(max_abs_diff(agent.critic1_target(), target0), 0.0);
  EXPECT_EQ(agent.update_count(), 2);
}

TEST(Update, PolyakTargetsLagTheOnlineNetworks)
{
  Rng init(14);
  Td3Config cfg;
  cfg.batch_size = 8;
  cfg.policy_delay = 1;
  cfg.tau = 0.1;
  Td3Agent agent(3, 2, cfg, init);
  Rng fill(15);
  const auto buf = random_buffer(32, 3, 2, fill);
  Rng rng(16);
  const auto old_target = agent.actor_target();
  agent.update(buf, rng);
  const auto & online = agent.actor();
  for (std::size_t i = 0; i < online.num_params(); ++i) {
    const double want = 0.9 * old_target.params()[i] + 0.1 * online.params()[i];
    EXPECT_NEAR(agent.actor_target().params()[i], want, 1e-15);
  }
}

// Constant critics c with r = c (1 - gamma) already satisfy the Bellman
// equation: zero loss, zero gradients, nothing moves.
TEST(Update, BellmanFixedPointHasZeroLoss)
{
  nn::Mlp q({3, 1}, nn::Activation::kIdentity);
  q.bias(0, 0) = 2.0;
  Td3Config cfg;
  cfg.gamma = 0.75;
  cfg.policy_delay = 100;
  Td3Agent agent(nn::Mlp({2, 4, 1}, nn::Activation::kTanh), q, q, cfg);
  Batch b;
  b.state_dim = 2;
  b.action_dim = 1;
  for (int j = 0; j < 5; ++j) {
    b.push({{0.1 * j, -0.2}, {0.3}, 2.0 * 0.25, {0.0, 0.1 * j}, false});
  }
  const auto info = agent.update_on_batch(b, std::vector<double>(5, 0.1));
  EXPECT_EQ(info.critic1_loss, 0.0);
  EXPECT_EQ(info.critic2_loss, 0.0);
  expect_same(agent.critic1(), q);
}

TEST(Update, MatchesScriptedReference)
{
  Td3Config cfg;
  cfg.hidden = {8, 6};
  cfg.batch_size = 12;
  cfg.tau = 0.05;
  Rng init(17);
  Td3Agent agent(3, 2, cfg, init);
  auto ref = oracle::RefTd3::from(agent);
  Rng fill(18);
  const auto buf = random_buffer(40, 3, 2, fill);
  Rng rng(19);
  for (int call = 0; call < 4; ++call) {
    const auto batch = buf.sample(cfg.batch_size, rng);
    const auto noise = agent.draw_smoothing_noise(batch.size, rng);
    agent.update_on_batch(batch, noise);
    ref.update(batch, noise);
  }
  auto check = [](const nn::Mlp & a, const oracle::RefNet & b) {
    const auto flat = b.flat();
    for (std::size_t i = 0; i < flat.size(); ++i) {
      EXPECT_NEAR(a.params()[i], flat[i], 1e-10);
    }
  };
  check(agent.actor(), ref.actor);
  check(agent.actor_target(), ref.actor_t);
  check(agent.critic1(), ref.q1);
  check(agent.critic2(), ref.q2);
  check(agent.critic1_target(), ref.q1_t);
  check(agent.critic2_target(), ref.q2_t);
}

// Terminal transitions with reward sin(2 s0) + a0: the critics must fit a
// smooth function of the input.
TEST(Update, CriticsRegressTerminalRewards)
{
  Td3Config cfg;
  cfg.hidden = {32, 32};
  cfg.batch_size = 64;
  cfg.policy_delay = 1000000;
  Rng init(20);
  Td3Agent agent(2, 1, cfg, init);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Rng fill(21);
  ReplayBuffer buf(512, 2, 1);
  for (int i = 0; i < 512; ++i) {
    const double s0 = u(fill);
    const double a0 = u(fill);
    buf.push({{s0, u(fill)}, {a0}, std::sin(2.0 * s0) + 0.5 * a0, {0.0, 0.0}, true});
  }
  Rng rng(22);
  double loss = 1.0;
  for (int step = 0; step < 2000 && loss >= 1e-3; ++step) {
    const auto info = agent.update(buf, rng);
    if (step % 50 == 49) {
      // Full-buffer loss of the first critic.
      double sum = 0.0;
      for (std::size_t i = 0; i < buf.size(); ++i) {
        const auto t = buf.at(i);
        std::vector<double> x = t.state;
        x.push_back(t.action[0]);
        const double d = agent.critic1().forward(x)[0] - t.reward;
        sum += d * d;
      }
      loss = sum / static_cast<double>(buf.size());
    }
    (void)info;
  }
  EXPECT_LT(loss, 1e-3);
}

TEST(Update, SameSeedSameAgent)
{
  auto run = [] {
    Rng init(23);
    Td3Config cfg;
    cfg.batch_size = 10;
    Td3Agent agent(3, 2, cfg, init);
    Rng fill(24);
    const auto buf = random_buffer(30, 3, 2, fill);
    Rng rng(25);
    for (int i = 0; i < 6; ++i) {
      agent.update(buf, rng);
    }
    return agent;
  };
  const auto a = run();
  const auto b = run();
  expect_same(a.actor(), b.actor());
  expect_same(a.critic2_target(), b.critic2_target());
}

TEST(Checkpoint, RoundTripKeepsNetworksAndCounter)
{
  Rng init(26);
  Td3Config cfg;
  cfg.batch_size = 10;
  cfg.tau = 0.2;
  cfg.hidden = {12, 7};
  Td3Agent agent(3, 2, cfg, init);
  Rng fill(27);
  const auto buf = random_buffer(30, 3, 2, fill);
  Rng rng(28);
  for (int i = 0; i < 3; ++i) {
    agent.update(buf, rng);
  }
  std::stringstream out;
  agent.save(out);
  const auto back = Td3Agent::load(out);
  EXPECT_EQ(back.update_count(), 3);
  EXPECT_EQ(back.state_dim(), 3u);
  EXPECT_EQ(back.action_dim(), 2u);
  EXPECT_EQ(back.config().tau, 0.2);
  EXPECT_EQ(back.config().hidden, cfg.hidden);
  expect_same(back.actor(), agent.actor());
  expect_same(back.actor_target(), agent.actor_target());
  expect_same(back.critic1(), agent.critic1());
  expect_same(back.critic2(), agent.critic2());
  expect_same(back.critic1_target(), agent.critic1_target());
  expect_same(back.critic2_target(), agent.critic2_target());

  std::stringstream junk("nothing useful");
  EXPECT_THROW(Td3Agent::load(junk), Td3Error);
  const std::string bytes = out.str();
  std::stringstream cut(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(Td3Agent::load(cut), std::exception);
}

TEST(Config, ValidateRejectsBadValues)
{
  Td3Config c;
  EXPECT_NO_THROW(c.validate());
  c.gamma = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.tau = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.policy_delay = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.smooth_sigma = -0.1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace tal::td3
