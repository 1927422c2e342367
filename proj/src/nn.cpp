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


#include "tal/nn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "tal/simd/kernels.hpp"

namespace tal::nn
{
namespace
{

constexpr std::array<char, 8> kMagic = {'T', 'A', 'L', 'M', 'L', 'P', '\0', '\0'};
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
    throw NnError("checkpoint truncated");
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> sizes, Activation output)
: sizes_(std::move(sizes)), output_(output)
{
  if (sizes_.size() < 2) {
    throw NnError("an MLP needs at least an input and an output size");
  }
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] == 0 || sizes_[l + 1] == 0) {
      throw NnError("layer sizes must be positive");
    }
    offsets_.push_back(total);
    total += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::fan_in_uniform(std::vector<std::size_t> sizes, Activation output, Rng & rng)
{
  Mlp net(std::move(sizes), output);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const std::size_t end = net.bias_offset(l) + net.sizes_[l + 1];
    for (std::size_t i = net.weight_offset(l); i < end; ++i) {
      net.params_[i] = dist(rng);
    }
  }
  return net;
}

std::vector<double> Mlp::forward(std::span<const double> input) const
{
  Tape tape;
  forward(input, tape);
  return tape.values.back();
}

void Mlp::forward(std::span<const double> input, Tape & tape) const
{
  if (input.size() != input_size()) {
    throw NnError(
      "input size " + std::to_string(input.size()) + " != " + std::to_string(input_size()));
  }
  for (double x : input) {
    if (!std::isfinite(x)) {
      throw NnError("non-finite network input");
    }
  }
  const auto & k = simd::kernels();
  tape.values.resize(sizes_.size());
  tape.values[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < num_layers(); ++l) {
    auto & out = tape.values[l + 1];
    out.resize(sizes_[l + 1]);
    k.gemv(
      params_.data() + weight_offset(l), tape.values[l].data(), params_.data() + bias_offset(l),
      out.data(), sizes_[l + 1], sizes_[l]);
    if (l + 1 < num_layers()) {
      k.relu(out.data(), out.size());
    } else if (output_ == Activation::kTanh) {
      for (auto & y : out) {
        y = std::tanh(y);
      }
    }
  }
}

void Mlp::backward(
  const Tape & tape, std::span<const double> output_grad, std::span<double> param_grad,
  std::span<double> input_grad) const
{
  if (output_grad.size() != output_size()) {
    throw NnError("output gradient size mismatch");
  }
  if (!param_grad.empty() && param_grad.size() != params_.size()) {
    throw NnError("parameter gradient size mismatch");
  }
  if (!input_grad.empty() && input_grad.size() != input_size()) {
    throw NnError("input gradient size mismatch");
  }
  const auto & k = simd::kernels();
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  if (output_ == Activation::kTanh) {
    const auto & y = tape.values.back();
    for (std::size_t i = 0; i < delta.size(); ++i) {
      delta[i] *= 1.0 - y[i] * y[i];
    }
  }
  std::vector<double> prev;
  for (std::size_t l = num_layers(); l-- > 0;) {
    const std::size_t rows = sizes_[l + 1];
    const std::size_t cols = sizes_[l];
    const auto & a = tape.values[l];
    const double * w = params_.data() + weight_offset(l);
    if (!param_grad.empty()) {
      double * gw = param_grad.data() + weight_offset(l);
      double * gb = param_grad.data() + bias_offset(l);
      for (std::size_t r = 0; r < rows; ++r) {
        k.axpy(delta[r], a.data(), gw + r * cols, cols);
        gb[r] += delta[r];
      }
    }
    if (l == 0 && input_grad.empty()) {
      break;
    }
    prev.assign(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      k.axpy(delta[r], w + r * cols, prev.data(), cols);
    }
    if (l == 0) {
      std::copy(prev.begin(), prev.end(), input_grad.begin());
      break;
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!(a[c] > 0.0)) {
        prev[c] = 0.0;
      }
    }
    delta.swap(prev);
  }
}

bool adam_step(std::span<double> params, std::span<const double> grads, AdamState & s)
{
  if (params.size() != grads.size() || s.m.size() != params.size() ||
      s.v.size() != params.size()) {
    throw NnError("adam_step: size mismatch");
  }
  for (double g : grads) {
    if (!std::isfinite(g)) {
      ++s.skipped;
      return false;
    }
  }
  ++s.step;
  const simd::AdamCoeffs c{
    s.beta1, s.beta2, s.epsilon, s.learning_rate,
    1.0 - std::pow(s.beta1, static_cast<double>(s.step)),
    1.0 - std::pow(s.beta2, static_cast<double>(s.step))};
  simd::kernels().adam(params.data(), grads.data(), s.m.data(), s.v.data(), params.size(), c);
  return true;
}

void soft_update(Mlp & target, const Mlp & model, double tau)
{
  if (!target.same_architecture(model)) {
    throw NnError("soft_update: architecture mismatch");
  }
  simd::kernels().lerp(target.params().data(), model.params().data(), tau, target.num_params());
}

void save_mlp(std::ostream & out, const Mlp & net)
{
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.sizes().size()));
  for (auto s : net.sizes()) {
    put<std::uint64_t>(out, s);
  }
  put<std::uint8_t>(out, static_cast<std::uint8_t>(net.output_activation()));
  put<std::uint64_t>(out, net.num_params());
  for (double p : net.params()) {
    put<double>(out, p);
  }
  if (!out) {
    throw NnError("failed writing network checkpoint");
  }
}

Mlp load_mlp(std::istream & in)
{
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw NnError("not a network checkpoint");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) {
    throw NnError("unsupported network checkpoint version " + std::to_string(version));
  }
  const auto count = get<std::uint32_t>(in);
  if (count < 2 || count > 64) {
    throw NnError("implausible layer count in checkpoint");
  }
  std::vector<std::size_t> sizes(count);
  for (auto & s : sizes) {
    s = static_cast<std::size_t>(get<std::uint64_t>(in));
  }
  const auto act = get<std::uint8_t>(in);
  if (act > 1) {
    throw NnError("unknown output activation in checkpoint");
  }
  Mlp net(sizes, static_cast<Activation>(act));
  if (get<std::uint64_t>(in) != net.num_params()) {
    throw NnError("parameter count does not match layer sizes");
  }
  for (auto & p : net.params()) {
    p = get<double>(in);
  }
  return net;
}

void load_mlp_into(std::istream & in, Mlp & net)
{
  Mlp loaded = load_mlp(in);
  if (!loaded.same_architecture(net)) {
    throw NnError("checkpoint architecture does not match the network");
  }
  net = std::move(loaded);
}

}  // namespace tal::nn
