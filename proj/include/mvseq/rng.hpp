// Copyright 2026 The mvseq Authors.
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

// Pinned pseudo-random machinery. Every stochastic choice in the library
// (random importance scores, k-means++ seeding, sweep seed derivation) goes
// through these functions so results are reproducible across platforms and
// can be re-derived from other languages:
//
//   Mix64(x)         = splitmix64 finalizer applied to x + 0x9e3779b97f4a7c15
//   HashString(s)    = 64-bit FNV-1a over the UTF-8 bytes of s
//   KeyedHash(seed, s, i) = Mix64(Mix64(Mix64(seed) ^ HashString(s)) ^ i)
//   ToUnit(h)        = (h >> 11) * 2^-53, in [0, 1)

#pragma once

#include <cstdint>
#include <string_view>

namespace mvseq {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t Mix64(std::uint64_t x) {
  std::uint64_t z = x + kGoldenGamma;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t HashString(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t KeyedHash(std::uint64_t seed, std::string_view key,
                                  std::uint64_t index) {
  return Mix64(Mix64(Mix64(seed) ^ HashString(key)) ^ index);
}

constexpr double ToUnit(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Sequential splitmix64 stream.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t Next() {
    std::uint64_t z = (state_ += kGoldenGamma);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr double Uniform() { return ToUnit(Next()); }

  /// Uniform integer in [0, n). Multiply-shift; bias is below 2^-32 for the
  /// sizes used here.
  constexpr std::uint64_t Below(std::uint64_t n) {
    __extension__ using U128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<U128>(Next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace mvseq
