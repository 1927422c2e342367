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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tal/nn.hpp"
#include "tal/rng.hpp"

namespace tal::simd
{
namespace
{

std::vector<double> randoms(std::size_t n, Rng & rng)
{
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto & x : v) {
    x = g(rng);
  }
  return v;
}

// Restores the startup variant when a test forces another one.
class IsaGuard
{
public:
  IsaGuard() : saved_(active_isa()) {}
  ~IsaGuard() { set_isa(saved_); }

private:
  Isa saved_;
};

TEST(Kernels, ScalarAlwaysAvailable)
{
  EXPECT_TRUE(isa_supported(Isa::kScalar));
  EXPECT_EQ(scalar_kernels().isa, Isa::kScalar);
  EXPECT_EQ(isa_name(Isa::kScalar), "scalar");
}

TEST(Kernels, ScalarReferenceValues)
{
  const auto & k = scalar_kernels();
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{4.0, -5.0, 6.0};
  EXPECT_EQ(k.dot(a.data(), b.data(), 3), 12.0);
  std::vector<double> y{1.0, 1.0, 1.0};
  k.axpy(2.0, a.data(), y.data(), 3);
  EXPECT_EQ(y, (std::vector<double>{3.0, 5.0, 7.0}));
  std::vector<double> r{-1.0, 0.0, 2.0};
  k.relu(r.data(), 3);
  EXPECT_EQ(r, (std::vector<double>{0.0, 0.0, 2.0}));
  std::vector<double> t{0.0, 10.0};
  const std::vector<double> src{1.0, 20.0};
  k.lerp(t.data(), src.data(), 0.25, 2);
  EXPECT_EQ(t, (std::vector<double>{0.25, 12.5}));
  const std::vector<double> w{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  const std::vector<double> bias{0.5, -0.5};
  std::vector<double> out(2);
  k.gemv(w.data(), a.data(), bias.data(), out.data(), 2, 3);
  EXPECT_EQ(out, (std::vector<double>{14.5, 31.5}));
  k.gemv(w.data(), a.data(), nullptr, out.data(), 2, 3);
  EXPECT_EQ(out, (std::vector<double>{14.0, 32.0}));
}

class Avx2Equivalence : public ::testing::Test
{
protected:
  void SetUp() override
  {
    if (!isa_supported(Isa::kAvx2)) {
      GTEST_SKIP() << "AVX2 variant not available on this machine";
    }
    s = &scalar_kernels();
    v = avx2_kernels();
  }

  const KernelTable * s{nullptr};
  const KernelTable * v{nullptr};
  Rng rng{77};
};

// Lengths cover empty, partial vectors and remainders of every lane count.
constexpr std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 100, 1001};

TEST_F(Avx2Equivalence, ElementwiseKernelsAreBitIdentical)
{
  for (std::size_t n : kLengths) {
    const auto x = randoms(n, rng);
    const auto y0 = randoms(n, rng);

    auto ys = y0;
    auto yv = y0;
    s->axpy(-0.37, x.data(), ys.data(), n);
    v->axpy(-0.37, x.data(), yv.data(), n);
    EXPECT_EQ(ys, yv) << "axpy n=" << n;

    ys = y0;
    yv = y0;
    s->lerp(ys.data(), x.data(), 0.005, n);
    v->lerp(yv.data(), x.data(), 0.005, n);
    EXPECT_EQ(ys, yv) << "lerp n=" << n;

    ys = y0;
    yv = y0;
    s->relu(ys.data(), n);
    v->relu(yv.data(), n);
    EXPECT_EQ(ys, yv) << "relu n=" << n;

    auto ps = y0;
    auto pv = y0;
    std::vector<double> ms(n, 0.0), vs(n, 0.0), mv(n, 0.0), vv(n, 0.0);
    for (int t = 1; t <= 3; ++t) {
      const AdamCoeffs c{
        0.9, 0.999, 1e-8, 1e-3, 1.0 - std::pow(0.9, t), 1.0 - std::pow(0.999, t)};
      const auto g = randoms(n, rng);
      s->adam(ps.data(), g.data(), ms.data(), vs.data(), n, c);
      v->adam(pv.data(), g.data(), mv.data(), vv.data(), n, c);
    }
    EXPECT_EQ(ps, pv) << "adam n=" << n;
    EXPECT_EQ(ms, mv) << "adam m n=" << n;
    EXPECT_EQ(vs, vv) << "adam v n=" << n;
  }
}

TEST_F(Avx2Equivalence, ReductionsAgreeToRounding)
{
  for (std::size_t n : kLengths) {
    const auto a = randoms(n, rng);
    const auto b = randoms(n, rng);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      scale += std::abs(a[i] * b[i]);
    }
    EXPECT_NEAR(
      s->dot(a.data(), b.data(), n), v->dot(a.data(), b.data(), n), 1e-14 * (1.0 + scale))
      << "dot n=" << n;

    const std::size_t rows = 1 + n % 13;
    const auto w = randoms(rows * n, rng);
    const auto bias = randoms(rows, rng);
    std::vector<double> ys(rows), yv(rows);
    s->gemv(w.data(), a.data(), bias.data(), ys.data(), rows, n);
    v->gemv(w.data(), a.data(), bias.data(), yv.data(), rows, n);
    for (std::size_t r = 0; r < rows; ++r) {
      EXPECT_NEAR(ys[r], yv[r], 1e-13 * (1.0 + static_cast<double>(n))) << "gemv n=" << n;
    }
  }
}

TEST_F(Avx2Equivalence, NetworkOutputsAgreeAcrossVariants)
{
  const IsaGuard guard;
  Rng init(5);
  const auto net = nn::Mlp::fan_in_uniform({40, 100, 100, 2}, nn::Activation::kTanh, init);
  const auto x = randoms(40, rng);
  set_isa(Isa::kScalar);
  const auto ys = net.forward(x);
  set_isa(Isa::kAvx2);
  const auto yv = net.forward(x);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(ys[i], yv[i], 1e-12);
  }
}

TEST(Dispatch, SetIsaSwitchesTable)
{
  const IsaGuard guard;
  set_isa(Isa::kScalar);
  EXPECT_EQ(active_isa(), Isa::kScalar);
  EXPECT_EQ(&kernels(), &scalar_kernels());
  if (!isa_supported(Isa::kAvx2)) {
    EXPECT_THROW(set_isa(Isa::kAvx2), std::invalid_argument);
  }
}

}  // namespace
}  // namespace tal::simd
