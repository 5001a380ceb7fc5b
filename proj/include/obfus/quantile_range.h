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
#ifndef OBFUS_QUANTILE_RANGE_H_
#define OBFUS_QUANTILE_RANGE_H_

#include <cstdint>

#include "obfus/core_model.h"

namespace obfus {

// Smallest support value x with CDF(x) >= q - 1e-12, for 0 < q <= 1.
int Quantile(const Pmf& p, double q);

// Smallest support value x with CDF(x) >= 1 - eps: the first value at which
// the distribution is exhausted up to eps.
int EstimateMax(const Pmf& p, double eps = 1e-9);

// Law-of-large-numbers extremum estimate: every published value receives
// extra_rounds further independent noise draws, and the maximum of the
// result minus (extra_rounds + 1) * E[noise] is returned.
double LlnMaxEstimate(const Histogram& masked, const NoiseSpec& noise,
                      int extra_rounds, uint64_t seed);

// Distribution of the sum of k independent draws from q (k >= 0).
Pmf ConvolutionPower(const Pmf& q, int k);

}  // namespace obfus

#endif  // OBFUS_QUANTILE_RANGE_H_
