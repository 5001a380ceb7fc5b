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

#include "obfus/random.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace obfus {

double Rng::UniformDouble() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

uint64_t Rng::UniformInt(uint64_t n) {
  if (n == 0) throw std::invalid_argument("UniformInt needs n >= 1");
  // Rejection on the top of the 64-bit range removes modulo bias.
  const uint64_t limit = std::numeric_limits<uint64_t>::max() -
                         std::numeric_limits<uint64_t>::max() % n;
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::Exponential(double rate) {
  return -std::log1p(-UniformDouble()) / rate;
}

int64_t Rng::Poisson(double mean) {
  if (mean < 0.0 || !std::isfinite(mean)) {
    throw std::invalid_argument("Poisson mean must be finite and >= 0");
  }
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    const double limit = std::exp(-mean);
    double prod = UniformDouble();
    int64_t k = 0;
    while (prod > limit) {
      prod *= UniformDouble();
      ++k;
    }
    return k;
  }
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = UniformDouble() - 0.5;
    const double v = UniformDouble();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<int64_t>(k);
    }
  }
}

DiscreteSampler::DiscreteSampler(std::span<const double> weights)
    : cumulative_(weights.size()) {
  if (weights.empty()) throw std::invalid_argument("no weights to sample");
  double acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) {
      throw std::invalid_argument("sampling weights must be >= 0");
    }
    acc += weights[i];
    cumulative_[i] = acc;
  }
  if (!(acc > 0.0)) throw std::invalid_argument("sampling weights sum to 0");
  for (double& c : cumulative_) c /= acc;
  cumulative_.back() = 1.0;
}

int DiscreteSampler::Sample(Rng& rng) const {
  const double u = rng.UniformDouble();
  // First index whose cumulative mass exceeds u; zero-weight cells are never
  // selected because their cumulative value equals the previous one.
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<int>(it - cumulative_.begin());
}

uint64_t DeriveSeed(uint64_t master, uint64_t index) {
  uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace obfus
