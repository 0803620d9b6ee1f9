// Copyright 2026 The provrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace provrec {

// Distribution helpers built directly on mt19937_64 output. The standard
// distributions are implementation-defined; these are not, so seeded runs
// reproduce across toolchains.

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

/// Uniform on [0, n) for n > 0, by rejection (no modulo bias).
inline std::uint64_t uniform_index(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do x = gen();
  while (x >= limit);
  return x % n;
}

/// Fisher-Yates shuffle.
template <typename T>
void shuffle(std::span<T> items, std::mt19937_64& gen) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(gen, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace provrec
