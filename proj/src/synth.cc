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
#include "obfus/synth.h"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "obfus/random.h"

namespace obfus {

Histogram GenPoissonMixture(const GeneratorConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("generator needs n >= 1");
  if (!(cfg.exp_param > 0.0)) {
    throw std::invalid_argument("exponential parameter must be > 0");
  }
  if (cfg.max_class < 0) throw std::invalid_argument("max_class must be >= 0");
  Rng rng(cfg.seed);
  std::vector<int64_t> counts(cfg.max_class + 1, 0);
  for (int64_t s = 0; s < cfg.n; ++s) {
    const double lambda = rng.Exponential(cfg.exp_param);
    const int64_t x = std::min<int64_t>(rng.Poisson(lambda), cfg.max_class);
    ++counts[x];
  }
  return Histogram(0, std::move(counts));
}

Histogram SampleFromPmf(const Pmf& p, int64_t n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample size must be >= 1");
  Rng rng(seed);
  DiscreteSampler sampler(p.probs());
  std::vector<int64_t> counts(p.size(), 0);
  for (int64_t s = 0; s < n; ++s) ++counts[sampler.Sample(rng)];
  return Histogram(p.support_min(), std::move(counts));
}

}  // namespace obfus
