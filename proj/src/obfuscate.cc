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
#include "obfus/obfuscate.h"

#include <stdexcept>
#include <string>
#include <vector>

#include "obfus/random.h"

namespace obfus {

Histogram Mask(const Histogram& raw, const ObfuscationScheme& scheme,
               uint64_t seed) {
  const Pmf& q = scheme.noise.pmf();
  Rng rng(seed);
  DiscreteSampler noise(q.probs());
  const int z_min = raw.support_min() + q.support_min();
  std::vector<int64_t> counts(raw.size() + q.size() - 1, 0);
  for (int i = 0; i < raw.size(); ++i) {
    for (int64_t c = 0; c < raw.counts()[i]; ++c) {
      ++counts[i + noise.Sample(rng)];
    }
  }
  return Histogram(z_min, std::move(counts));
}

Histogram Truncate(const Histogram& masked, int t) {
  if (t < masked.support_min()) {
    throw std::invalid_argument("truncation threshold " + std::to_string(t) +
                                " below the support minimum " +
                                std::to_string(masked.support_min()));
  }
  if (t >= masked.support_max()) return masked;
  const int keep = t - masked.support_min();
  std::vector<int64_t> counts(masked.counts().begin(),
                              masked.counts().begin() + keep + 1);
  for (int i = keep + 1; i < masked.size(); ++i) {
    counts[keep] += masked.counts()[i];
  }
  return Histogram(masked.support_min(), std::move(counts));
}

PublishedDataset Publish(const Histogram& masked,
                         const ObfuscationScheme& scheme,
                         IntRange true_support) {
  const IntRange declared = scheme.declared_support.value_or(true_support);
  if (!declared.Contains(true_support)) {
    throw std::invalid_argument("declared support does not cover the true "
                                "support");
  }
  std::optional<int> t = scheme.truncation_at;
  if (t) {
    const int z_min = declared.min + scheme.noise.support().min;
    const int z_max = declared.max + scheme.noise.support().max;
    if (*t <= z_min || *t > z_max) {
      throw std::invalid_argument("truncation threshold outside the masked "
                                  "support");
    }
  }
  return PublishedDataset{t ? Truncate(masked, *t) : masked, scheme.noise, t,
                          declared};
}

}  // namespace obfus
