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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "tal/simd/kernels.hpp"

namespace tal::simd
{

#if !defined(TAL_HAVE_AVX2)
const KernelTable * avx2_kernels() { return nullptr; }
#endif

namespace
{

bool cpu_has_avx2()
{
#if defined(TAL_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable * initial_table()
{
  const char * env = std::getenv("TAL_SIMD");
  const std::string choice = env ? env : "auto";
  if (choice == "scalar") {
    return &scalar_kernels();
  }
  if (cpu_has_avx2() && avx2_kernels()) {
    return avx2_kernels();
  }
  return &scalar_kernels();
}

std::atomic<const KernelTable *> & active()
{
  static std::atomic<const KernelTable *> table{initial_table()};
  return table;
}

}  // namespace

bool isa_supported(Isa isa)
{
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
      return avx2_kernels() != nullptr && cpu_has_avx2();
  }
  return false;
}

const KernelTable & kernels() { return *active().load(std::memory_order_relaxed); }

void set_isa(Isa isa)
{
  if (!isa_supported(isa)) {
    throw std::invalid_argument("SIMD variant not available: " + std::string(isa_name(isa)));
  }
  active().store(isa == Isa::kScalar ? &scalar_kernels() : avx2_kernels());
}

Isa active_isa() { return kernels().isa; }

std::string_view isa_name(Isa isa)
{
  return isa == Isa::kScalar ? "scalar" : "avx2";
}

}  // namespace tal::simd
