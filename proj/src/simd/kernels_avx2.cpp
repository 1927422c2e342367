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

// Compiled with -mavx2 -mfma. Nothing in here may be called unless CPUID
// reports both features; dispatch.cpp guards that.

#include "tal/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace tal::simd
{
namespace
{

inline double hsum(__m256d v)
{
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

double dot_avx2(const double * a, const double * b, std::size_t n)
{
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    sum += a[i] * b[i];
  }
  return sum;
}

// Four rows share each load of x.
void gemv_avx2(
  const double * w, const double * x, const double * bias, double * y, std::size_t rows,
  std::size_t cols)
{
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    const double * w0 = w + r * cols;
    const double * w1 = w0 + cols;
    const double * w2 = w1 + cols;
    const double * w3 = w2 + cols;
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d xv = _mm256_loadu_pd(x + c);
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + c), xv, a0);
      a1 = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + c), xv, a1);
      a2 = _mm256_fmadd_pd(_mm256_loadu_pd(w2 + c), xv, a2);
      a3 = _mm256_fmadd_pd(_mm256_loadu_pd(w3 + c), xv, a3);
    }
    double s0 = hsum(a0);
    double s1 = hsum(a1);
    double s2 = hsum(a2);
    double s3 = hsum(a3);
    for (; c < cols; ++c) {
      s0 += w0[c] * x[c];
      s1 += w1[c] * x[c];
      s2 += w2[c] * x[c];
      s3 += w3[c] * x[c];
    }
    if (bias) {
      s0 += bias[r];
      s1 += bias[r + 1];
      s2 += bias[r + 2];
      s3 += bias[r + 3];
    }
    y[r] = s0;
    y[r + 1] = s1;
    y[r + 2] = s2;
    y[r + 3] = s3;
  }
  for (; r < rows; ++r) {
    const double acc = dot_avx2(w + r * cols, x, cols);
    y[r] = bias ? bias[r] + acc : acc;
  }
}

// No FMA here: the product is rounded before the add, as in the scalar path.
void axpy_avx2(double alpha, const double * x, double * y, std::size_t n)
{
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) {
    y[i] += alpha * x[i];
  }
}

void adam_avx2(
  double * param, const double * grad, double * m, double * v, std::size_t n,
  const AdamCoeffs & c)
{
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d ib1 = _mm256_set1_pd(one_minus_b1);
  const __m256d ib2 = _mm256_set1_pd(one_minus_b2);
  const __m256d eps = _mm256_set1_pd(c.epsilon);
  const __m256d lr = _mm256_set1_pd(c.learning_rate);
  const __m256d bc1 = _mm256_set1_pd(c.bias1);
  const __m256d bc2 = _mm256_set1_pd(c.bias2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(ib1, g));
    __m256d vv = _mm256_add_pd(
      _mm256_mul_pd(b2, _mm256_loadu_pd(v + i)), _mm256_mul_pd(ib2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d m_hat = _mm256_div_pd(mv, bc1);
    const __m256d v_hat = _mm256_div_pd(vv, bc2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps);
    const __m256d delta = _mm256_div_pd(_mm256_mul_pd(lr, m_hat), denom);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), delta));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_minus_b1 * g;
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
    const double m_hat = m[i] / c.bias1;
    const double v_hat = v[i] / c.bias2;
    param[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

void lerp_avx2(double * target, const double * source, double tau, std::size_t n)
{
  const double keep = 1.0 - tau;
  const __m256d vk = _mm256_set1_pd(keep);
  const __m256d vt = _mm256_set1_pd(tau);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_mul_pd(vk, _mm256_loadu_pd(target + i));
    const __m256d b = _mm256_mul_pd(vt, _mm256_loadu_pd(source + i));
    _mm256_storeu_pd(target + i, _mm256_add_pd(a, b));
  }
  for (; i < n; ++i) {
    target[i] = keep * target[i] + tau * source[i];
  }
}

void relu_avx2(double * x, std::size_t n)
{
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // max(x, 0) returns the second operand for NaN and for +-0 ties, matching
    // the scalar (x > 0 ? x : 0).
    _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  }
  for (; i < n; ++i) {
    x[i] = x[i] > 0.0 ? x[i] : 0.0;
  }
}

constexpr KernelTable kAvx2Table{
  Isa::kAvx2, "avx2", dot_avx2, gemv_avx2, axpy_avx2, adam_avx2, lerp_avx2, relu_avx2};

}  // namespace

const KernelTable * avx2_kernels() { return &kAvx2Table; }

}  // namespace tal::simd
