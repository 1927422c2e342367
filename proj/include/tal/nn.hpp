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

#include "tal/rng.hpp"

namespace tal::nn
{

class NnError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class Activation : std::uint8_t { kIdentity = 0, kTanh = 1 };

/// Fully connected network with ReLU hidden layers. Parameters live in one
/// flat array, layer by layer: row-major weights (out x in), then biases.
class Mlp
{
public:
  /// Activations of one forward pass, kept for the backward pass.
  struct Tape
  {
    std::vector<std::vector<double>> values;  // [0] input, [l + 1] output of layer l

    std::span<const double> output() const { return values.back(); }
  };

  Mlp() = default;
  /// All parameters zero.
  Mlp(std::vector<std::size_t> sizes, Activation output);
  /// Weights and biases uniform in +-1/sqrt(fan_in).
  static Mlp fan_in_uniform(std::vector<std::size_t> sizes, Activation output, Rng & rng);

  const std::vector<std::size_t> & sizes() const { return sizes_; }
  Activation output_activation() const { return output_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  std::size_t num_params() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const
  {
    return offsets_[layer] + sizes_[layer] * sizes_[layer + 1];
  }
  double & weight(std::size_t layer, std::size_t row, std::size_t col)
  {
    return params_[weight_offset(layer) + row * sizes_[layer] + col];
  }
  double & bias(std::size_t layer, std::size_t row) { return params_[bias_offset(layer) + row]; }

  std::vector<double> forward(std::span<const double> input) const;
  void forward(std::span<const double> input, Tape & tape) const;

  /// Reverse pass for d(output . output_grad). Parameter gradients are
  /// accumulated into param_grad; input_grad is overwritten. Either span may
  /// be empty to skip that part.
  void backward(
    const Tape & tape, std::span<const double> output_grad, std::span<double> param_grad,
    std::span<double> input_grad) const;

  bool same_architecture(const Mlp & other) const
  {
    return sizes_ == other.sizes_ && output_ == other.output_;
  }

private:
  std::vector<std::size_t> sizes_;
  Activation output_{Activation::kIdentity};
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

struct AdamState
{
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step{0};
  std::int64_t skipped{0};  // updates rejected for non-finite gradients
  double learning_rate{1e-3};
  double beta1{0.9};
  double beta2{0.999};
  double epsilon{1e-8};

  AdamState() = default;
  explicit AdamState(std::size_t n, double lr = 1e-3) : m(n, 0.0), v(n, 0.0), learning_rate(lr) {}
};

/// Bias-corrected Adam step. Returns false, and leaves everything untouched
/// except the skip counter, when a gradient is not finite.
bool adam_step(std::span<double> params, std::span<const double> grads, AdamState & state);

/// target = (1 - tau) * target + tau * model
void soft_update(Mlp & target, const Mlp & model, double tau);

/// Little-endian binary layout: magic, version, layer sizes, output
/// activation, parameter count, parameters.
void save_mlp(std::ostream & out, const Mlp & net);
Mlp load_mlp(std::istream & in);
/// Loads into `net`, rejecting any architecture difference.
void load_mlp_into(std::istream & in, Mlp & net);

}  // namespace tal::nn
