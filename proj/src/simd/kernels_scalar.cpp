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

#include "tal/simd/kernels.hpp"

#include <cmath>

namespace tal::simd
{
namespace
{

double dot_scalar(const double * a, const double * b, std::size_t n)
{
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += a[i] * b[i];
  }
  return sum;
}

void gemv_scalar(
  const double * w, const double * x, const double * bias, double * y, std::size_t rows,
  std::size_t cols)
{
  for (std::size_t r = 0; r < rows; ++r) {
    const double acc = dot_scalar(w + r * cols, x, cols);
    y[r] = bias ? bias[r] + acc : acc;
  }
}

void axpy_scalar(double alpha, const double * x, double * y, std::size_t n)
{
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += alpha * x[i];
  }
}

void adam_scalar(
  double * param, const double * grad, double * m, double * v, std::size_t n,
  const AdamCoeffs & c)
{
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_minus_b1 * g;
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
    const double m_hat = m[i] / c.bias1;
    const double v_hat = v[i] / c.bias2;
    param[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

void lerp_scalar(double * target, const double * source, double tau, std::size_t n)
{
  const double keep = 1.0 - tau;
  for (std::size_t i = 0; i < n; ++i) {
    target[i] = keep * target[i] + tau * source[i];
  }
}

void relu_scalar(double * x, std::size_t n)
{
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = x[i] > 0.0 ? x[i] : 0.0;
  }
}

constexpr KernelTable kScalarTable{
  Isa::kScalar, "scalar", dot_scalar, gemv_scalar, axpy_scalar,
  adam_scalar,  lerp_scalar, relu_scalar};

}  // namespace

const KernelTable & scalar_kernels() { return kScalarTable; }

}  // namespace tal::simd
