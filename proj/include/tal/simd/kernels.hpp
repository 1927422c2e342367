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
#include <span>
#include <string_view>

// Dense double-precision kernels behind the MLP forward/backward passes and the
// optimizer. Every kernel has a portable scalar reference and, on x86-64, an
// AVX2/FMA variant. The variant is picked once at startup from CPUID; the
// TAL_SIMD environment variable (scalar|avx2|auto) overrides the choice.
//
// Elementwise kernels (axpy, adam, lerp, relu) are bit-identical across
// variants. Reductions (dot, gemv) reassociate the sum and agree to rounding.
namespace tal::simd
{

enum class Isa { kScalar, kAvx2 };

struct AdamCoeffs
{
  double beta1;
  double beta2;
  double epsilon;
  double learning_rate;
  double bias1;  // 1 - beta1^t
  double bias2;  // 1 - beta2^t
};

struct KernelTable
{
  Isa isa;
  const char * name;
  // sum_i a[i] * b[i]
  double (*dot)(const double * a, const double * b, std::size_t n);
  // y[r] = bias[r] + sum_c w[r * cols + c] * x[c]; bias may be null
  void (*gemv)(
    const double * w, const double * x, const double * bias, double * y, std::size_t rows,
    std::size_t cols);
  // y += alpha * x
  void (*axpy)(double alpha, const double * x, double * y, std::size_t n);
  // Adam moment update followed by the bias-corrected parameter step.
  void (*adam)(
    double * param, const double * grad, double * m, double * v, std::size_t n,
    const AdamCoeffs & c);
  // target = (1 - tau) * target + tau * source
  void (*lerp)(double * target, const double * source, double tau, std::size_t n);
  // x = max(x, 0)
  void (*relu)(double * x, std::size_t n);
};

const KernelTable & scalar_kernels();
// Returns nullptr when the variant was not compiled in.
const KernelTable * avx2_kernels();

bool isa_supported(Isa isa);
// Currently dispatched table.
const KernelTable & kernels();
// Forces a variant; throws std::invalid_argument if the CPU or build lacks it.
void set_isa(Isa isa);
Isa active_isa();
std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b)
{
  return kernels().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y)
{
  kernels().axpy(alpha, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

}  // namespace tal::simd
