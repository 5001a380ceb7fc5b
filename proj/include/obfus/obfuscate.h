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
#ifndef OBFUS_OBFUSCATE_H_
#define OBFUS_OBFUSCATE_H_

#include <cstdint>
#include <optional>

#include "obfus/core_model.h"

namespace obfus {

// Everything an analyst is allowed to see: the (possibly truncated) masked
// histogram, the noise law, the truncation threshold and the announced
// X-support.
struct PublishedDataset {
  Histogram masked;
  NoiseSpec noise;
  std::optional<int> truncation_at;
  IntRange declared_support;
};

// Adds an independent noise draw to every individual. Truncation is not
// applied here.
Histogram Mask(const Histogram& raw, const ObfuscationScheme& scheme,
               uint64_t seed);

// Collapses every value >= t into a bucket labelled t. Thresholds above the
// support leave the histogram unchanged.
Histogram Truncate(const Histogram& masked, int t);

// Applies the scheme's truncation and resolves the announced support, which
// defaults to true_support and must contain it.
PublishedDataset Publish(const Histogram& masked,
                         const ObfuscationScheme& scheme,
                         IntRange true_support);

}  // namespace obfus

#endif  // OBFUS_OBFUSCATE_H_
