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
#include "obfus/assess.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>

#include "obfus/random.h"
#include "obfus/synth.h"

namespace obfus {

BootstrapReport Bootstrap(const LikelihoodModel& model,
                          std::span<const double> p_hat, int64_t n, int B,
                          Method method, uint64_t seed,
                          const BootstrapOptions& options) {
  if (B < 2) throw std::invalid_argument("bootstrap needs B >= 2");
  if (n < 1) throw std::invalid_argument("bootstrap needs n >= 1");
  const int x_len = model.x_len();
  if (static_cast<int>(p_hat.size()) != x_len) {
    throw std::invalid_argument("p_hat length does not match the model");
  }
  if (!options.truth.empty() &&
      static_cast<int>(options.truth.size()) != x_len) {
    throw std::invalid_argument("truth length does not match the model");
  }
  // Validates p_hat as a PMF on the way.
  const Pmf masked_law(0, model.mixing.Apply(
                              Pmf(0, {p_hat.begin(), p_hat.end()}).probs()));

  std::vector<std::optional<std::vector<double>>> results(B);
  auto run = [&](int b) {
    const uint64_t s = options.replicate_seed ? options.replicate_seed(seed, b)
                                              : DeriveSeed(seed, b);
    const Histogram draw = SampleFromPmf(masked_law, n, s);
    try {
      LikelihoodModel replicate(model.mixing, draw.counts(), model.noise,
                                model.truncation_at);
      results[b] = Estimate(replicate, method, options.estimate).p_hat;
    } catch (const std::exception&) {
      results[b].reset();
    }
  };

  int threads = options.threads > 0
                    ? options.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, B);
  if (threads == 1) {
    for (int b = 0; b < B; ++b) run(b);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int b = next++; b < B; b = next++) run(b);
      });
    }
    for (auto& th : pool) th.join();
  }

  BootstrapReport report;
  report.mean.assign(x_len, 0.0);
  report.variance.assign(x_len, 0.0);
  report.mse.assign(x_len, 0.0);
  if (!options.truth.empty()) report.mse_vs_truth.assign(x_len, 0.0);
  for (const auto& r : results) {
    if (!r) {
      ++report.failed_replicates;
      continue;
    }
    ++report.replicates;
    for (int i = 0; i < x_len; ++i) report.mean[i] += (*r)[i];
  }
  if (report.replicates < 2) {
    throw std::runtime_error("fewer than two bootstrap replicates succeeded");
  }
  const double ok = report.replicates;
  for (double& m : report.mean) m /= ok;
  for (const auto& r : results) {
    if (!r) continue;
    for (int i = 0; i < x_len; ++i) {
      const double v = (*r)[i];
      report.variance[i] += (v - report.mean[i]) * (v - report.mean[i]);
      report.mse[i] += (v - p_hat[i]) * (v - p_hat[i]);
      if (!options.truth.empty()) {
        const double e = v - options.truth[i];
        report.mse_vs_truth[i] += e * e;
      }
    }
  }
  for (int i = 0; i < x_len; ++i) {
    // Divisor B, so that mse = variance + bias^2 holds exactly.
    report.variance[i] /= ok;
    report.mse[i] /= ok;
    if (!options.truth.empty()) report.mse_vs_truth[i] /= ok;
  }
  return report;
}

}  // namespace obfus
