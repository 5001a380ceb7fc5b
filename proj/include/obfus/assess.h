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
#ifndef OBFUS_ASSESS_H_
#define OBFUS_ASSESS_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "obfus/estimators.h"
#include "obfus/likelihood.h"

namespace obfus {

struct BootstrapOptions {
  EstimateOptions estimate;
  // Per-replicate seed; DeriveSeed(master, b) when unset.
  std::function<uint64_t(uint64_t master, int replicate)> replicate_seed;
  // Optional known truth; fills BootstrapReport::mse_vs_truth.
  std::vector<double> truth;
  // Worker threads, 0 = hardware concurrency. Results do not depend on it.
  int threads = 0;
};

struct BootstrapReport {
  // Spread around the replicate mean with divisor B, so that
  // mse = variance + (mean - p_hat)^2.
  std::vector<double> variance;
  // Mean squared deviation of the replicate estimates from p_hat.
  std::vector<double> mse;
  std::vector<double> mse_vs_truth;
  std::vector<double> mean;
  int replicates = 0;
  int failed_replicates = 0;
};

// Parametric bootstrap: B times, draw n masked observations from M p_hat,
// re-estimate with the given method, and summarize the spread of the
// estimates per component. Replicates whose estimator throws are excluded
// and counted.
BootstrapReport Bootstrap(const LikelihoodModel& model,
                          std::span<const double> p_hat, int64_t n, int B,
                          Method method, uint64_t seed,
                          const BootstrapOptions& options = {});

}  // namespace obfus

#endif  // OBFUS_ASSESS_H_
