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
#include "obfus/quantile_range.h"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "obfus/random.h"

namespace obfus {
namespace {

constexpr double kQuantileSlack = 1e-12;

int FirstAtLeast(const Pmf& p, double level) {
  const std::vector<double> cdf = Cdf(p);
  for (int i = 0; i < p.size(); ++i) {
    if (cdf[i] >= level) return p.support_min() + i;
  }
  return p.support_max();
}

}  // namespace

int Quantile(const Pmf& p, double q) {
  if (!(q > 0.0 && q <= 1.0)) {
    throw std::invalid_argument("quantile level must lie in (0, 1]");
  }
  return FirstAtLeast(p, q - kQuantileSlack);
}

int EstimateMax(const Pmf& p, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) {
    throw std::invalid_argument("eps must lie in [0, 1)");
  }
  return FirstAtLeast(p, 1.0 - eps);
}

Pmf ConvolutionPower(const Pmf& q, int k) {
  if (k < 0) throw std::invalid_argument("convolution power must be >= 0");
  Pmf result = Pmf::PointMass(0);
  Pmf square = q;
  while (k > 0) {
    if (k & 1) result = Convolve(result, square);
    k >>= 1;
    if (k > 0) square = Convolve(square, square);
  }
  return result;
}

double LlnMaxEstimate(const Histogram& masked, const NoiseSpec& noise,
                      int extra_rounds, uint64_t seed) {
  if (extra_rounds < 0) {
    throw std::invalid_argument("extra_rounds must be >= 0");
  }
  // One draw from the k-fold sum replaces k separate noise draws.
  const Pmf sum_law = ConvolutionPower(noise.pmf(), extra_rounds);
  DiscreteSampler sampler(sum_law.probs());
  Rng rng(seed);
  int64_t best = std::numeric_limits<int64_t>::min();
  for (int i = 0; i < masked.size(); ++i) {
    const int64_t value = masked.support_min() + i;
    for (int64_t c = 0; c < masked.counts()[i]; ++c) {
      const int64_t w = value + sum_law.support_min() + sampler.Sample(rng);
      best = std::max(best, w);
    }
  }
  return static_cast<double>(best) - (extra_rounds + 1) * noise.Mean();
}

}  // namespace obfus
