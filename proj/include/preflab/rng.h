// Copyright 2026 The Preflab Authors.
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

#ifndef PREFLAB_RNG_H_
#define PREFLAB_RNG_H_

#include <cstdint>
#include <random>
#include <vector>

namespace preflab {

// mt19937_64 engine with hand-rolled draw helpers. The standard guarantees
// the engine's output stream; the standard *distributions* are
// implementation-defined, so everything downstream of the raw 64-bit draws
// is implemented here to keep results bit-reproducible.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double NextUnit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool NextBernoulli(double p) { return NextUnit() < p; }

  // Uniform integer in [0, n) by rejection-free scaling (desk-scale n, the
  // modulo bias at n << 2^64 is irrelevant but rejection keeps it exact).
  uint64_t NextBelow(uint64_t n) {
    uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
    uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return draw % n;
  }

  // Standard normal via Box-Muller on explicit unit draws.
  double NextGaussian();

  // Index draw from non-negative weights by inverse CDF in index order.
  size_t NextCategorical(const std::vector<double>& weights);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer; used to derive independent stream seeds from
// (root seed, stream index) pairs.
uint64_t MixSeed(uint64_t seed, uint64_t stream);

}  // namespace preflab

#endif  // PREFLAB_RNG_H_
