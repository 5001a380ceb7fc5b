// Copyright 2026 The Obfus Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Seeded random source whose output is identical on every conforming C++
// implementation. std::mt19937_64 has a fully specified output sequence, but
// the standard <random> distributions do not, so every variate used by the
// toolkit is derived from raw 64-bit words here.

#ifndef OBFUS_RANDOM_H_
#define OBFUS_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace obfus {

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double UniformDouble();

  // Uniform on {0, ..., n - 1}; n >= 1.
  uint64_t UniformInt(uint64_t n);

  // Exponential with the given rate (mean 1 / rate).
  double Exponential(double rate);

  // Poisson with the given mean. Inversion for small means, Hormann's PTRS
  // transformed rejection above 10.
  int64_t Poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

// Draws indices 0..k-1 with the given weights by inverting the cumulative
// distribution.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(std::span<const double> weights);

  int Sample(Rng& rng) const;
  int size() const { return static_cast<int>(cumulative_.size()); }

 private:
  std::vector<double> cumulative_;
};

// SplitMix64 finalizer applied to (master, index): independent child seeds
// for bootstrap replicates and per-run streams.
uint64_t DeriveSeed(uint64_t master, uint64_t index);

}  // namespace obfus

#endif  // OBFUS_RANDOM_H_
