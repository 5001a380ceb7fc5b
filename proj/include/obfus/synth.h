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
#ifndef OBFUS_SYNTH_H_
#define OBFUS_SYNTH_H_

#include <cstdint>

#include "obfus/core_model.h"

namespace obfus {

struct GeneratorConfig {
  int64_t n = 1'000'000;
  // Rate of the exponential prior on the Poisson mean (prior mean 1 / rate).
  double exp_param = 2.5;
  int max_class = 12;
  uint64_t seed = 0;
};

// n draws of lambda ~ Exponential(exp_param), x ~ Poisson(lambda), with x
// clamped into [0, max_class]. Support is always {0..max_class}.
Histogram GenPoissonMixture(const GeneratorConfig& cfg);

// n independent draws from p on p's support.
Histogram SampleFromPmf(const Pmf& p, int64_t n, uint64_t seed);

}  // namespace obfus

#endif  // OBFUS_SYNTH_H_
