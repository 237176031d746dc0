// Copyright (c) 2026 The ctcmarg Authors
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

#include <cstdint>
#include <random>
#include <vector>

namespace ctcmarg {

// Seeded random stream. mt19937_64 has a fully specified output sequence,
// and every draw below is built from raw engine words, so a given seed
// yields identical results on any platform or compiler. The std::*
// distribution classes are deliberately avoided: their mapping from engine
// output to samples is implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be positive. Rejection-free modulo is
  // avoided so small n stays exactly uniform.
  uint64_t below(uint64_t n) {
    uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  // Index draw from unnormalized nonnegative weights by CDF walk.
  // total must equal the sum of weights (caller usually has it already).
  int32_t categorical(const std::vector<double>& weights, double total) {
    double u = uniform01() * total;
    double acc = 0.0;
    int32_t last_positive = -1;
    for (int32_t i = 0; i < static_cast<int32_t>(weights.size()); ++i) {
      if (weights[i] <= 0.0) continue;
      last_positive = i;
      acc += weights[i];
      if (u < acc) return i;
    }
    return last_positive;  // u landed in the rounding gap at the top
  }

  // Independent child stream. Derivation uses only the parent seed, never
  // the draw position, so child streams do not depend on call order.
  Rng child(uint64_t stream) const { return Rng(mix(seed_, stream)); }

  // splitmix64-style avalanche of (a, b) into one seed.
  static uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace ctcmarg
