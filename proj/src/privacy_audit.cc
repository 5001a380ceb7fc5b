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
#include "obfus/privacy_audit.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "obfus/random.h"

namespace obfus {
namespace {

int Rows(const AuditInstance& inst) {
  return static_cast<int>(inst.x_counts.size());
}

// Rows holding a cell on anti-diagonal d.
std::pair<int, int> DiagonalRows(const AuditInstance& inst, int d) {
  return {std::max(0, d - inst.noise_size + 1), std::min(Rows(inst) - 1, d)};
}

BigInt Binomial(int64_t n, int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt out = 1;
  for (int64_t i = 1; i <= k; ++i) {
    out *= n - k + i;
    out /= i;
  }
  return out;
}

using State = std::vector<int64_t>;
using Layer = std::map<State, BigInt>;

// Spreads "left" over rows [row, hi] of one anti-diagonal within the
// remaining row capacities; rows whose last cell is on this diagonal must
// be emptied.
void Distribute(State& state, int row, int hi, int64_t left, int closing_row,
                const BigInt& weight, Layer& out) {
  if (row > hi) {
    if (left != 0) return;
    if (closing_row >= 0 && state[closing_row] != 0) return;
    out[state] += weight;
    return;
  }
  const int64_t cap = state[row];
  int64_t lo = 0;
  int64_t up = std::min(cap, left);
  if (row == closing_row) {
    if (cap > left) return;
    lo = up = cap;
  }
  if (row == hi) {
    lo = std::max(lo, left);
    if (lo > up) return;
    up = lo;
  }
  for (int64_t v = lo; v <= up; ++v) {
    state[row] -= v;
    Distribute(state, row + 1, hi, left - v, closing_row, weight, out);
    state[row] += v;
  }
}

}  // namespace

void AuditInstance::Validate() const {
  if (x_counts.empty() || noise_size < 1) {
    throw std::invalid_argument("audit instance needs rows and noise values");
  }
  if (z_counts.size() != x_counts.size() + noise_size - 1) {
    throw std::invalid_argument(
        "anti-diagonal count must be rows + noise_size - 1");
  }
  for (int64_t v : x_counts) {
    if (v < 0) throw std::invalid_argument("row sums must be >= 0");
  }
  for (int64_t v : z_counts) {
    if (v < 0) throw std::invalid_argument("anti-diagonal sums must be >= 0");
  }
  const int64_t xs = std::accumulate(x_counts.begin(), x_counts.end(),
                                     int64_t{0});
  const int64_t zs = std::accumulate(z_counts.begin(), z_counts.end(),
                                     int64_t{0});
  if (xs != zs) {
    throw std::invalid_argument("inconsistent totals: rows sum to " +
                                std::to_string(xs) +
                                ", anti-diagonals to " + std::to_string(zs));
  }
}

AuditInstance AuditInstance::FromAssignment(
    const std::vector<std::vector<int64_t>>& matrix) {
  if (matrix.empty() || matrix.front().empty()) {
    throw std::invalid_argument("assignment matrix must be non-empty");
  }
  AuditInstance inst;
  inst.noise_size = static_cast<int>(matrix.front().size());
  inst.x_counts.assign(matrix.size(), 0);
  inst.z_counts.assign(matrix.size() + inst.noise_size - 1, 0);
  for (size_t i = 0; i < matrix.size(); ++i) {
    if (static_cast<int>(matrix[i].size()) != inst.noise_size) {
      throw std::invalid_argument("assignment matrix must be rectangular");
    }
    for (int j = 0; j < inst.noise_size; ++j) {
      inst.x_counts[i] += matrix[i][j];
      inst.z_counts[i + j] += matrix[i][j];
    }
  }
  return inst;
}

BigInt CountMatrices(const AuditInstance& instance, bool fix_rows,
                     int64_t state_cap) {
  instance.Validate();
  const int diagonals = static_cast<int>(instance.z_counts.size());
  if (!fix_rows) {
    // Anti-diagonals are independent: compositions of z_d into len_d parts.
    BigInt count = 1;
    for (int d = 0; d < diagonals; ++d) {
      const auto [lo, hi] = DiagonalRows(instance, d);
      const int64_t len = hi - lo + 1;
      count *= Binomial(instance.z_counts[d] + len - 1, len - 1);
    }
    return count;
  }

  Layer layer;
  layer[instance.x_counts] = 1;
  for (int d = 0; d < diagonals; ++d) {
    const auto [lo, hi] = DiagonalRows(instance, d);
    const int closing = d - instance.noise_size + 1;
    Layer next;
    for (const auto& [state, weight] : layer) {
      State s = state;
      Distribute(s, lo, hi, instance.z_counts[d], closing, weight, next);
      if (static_cast<int64_t>(next.size()) > state_cap) {
        throw std::runtime_error(
            "audit state space exceeds the cap of " +
            std::to_string(state_cap) +
            " states; use the Monte Carlo audit for this instance");
      }
    }
    layer = std::move(next);
    if (layer.empty()) return 0;
  }
  // Every row has closed by the last diagonal.
  BigInt total = 0;
  for (const auto& [state, weight] : layer) total += weight;
  return total;
}

double Log10(const BigInt& value) {
  if (value <= 0) return -std::numeric_limits<double>::infinity();
  const unsigned bits = boost::multiprecision::msb(value) + 1;
  const unsigned shift = bits > 60 ? bits - 60 : 0;
  const BigInt top = value >> shift;
  return std::log10(top.convert_to<double>()) + shift * std::log10(2.0);
}

AuditProbability ConditionalProbability(const AuditInstance& instance,
                                        int64_t state_cap) {
  AuditProbability out;
  out.consistent_with_rows = CountMatrices(instance, true, state_cap);
  out.consistent = CountMatrices(instance, false, state_cap);
  out.exact = BigRational(out.consistent_with_rows, out.consistent);
  out.log10_value = Log10(out.consistent_with_rows) - Log10(out.consistent);
  // Direct conversion loses everything below the double range.
  out.value = out.log10_value > -300.0 ? out.exact.convert_to<double>()
                                       : std::pow(10.0, out.log10_value);
  return out;
}

MonteCarloAuditResult MonteCarloAudit(const AuditInstance& instance,
                                      int64_t samples, uint64_t seed) {
  instance.Validate();
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  const int rows = Rows(instance);
  const int diagonals = static_cast<int>(instance.z_counts.size());
  const double log10_denominator = Log10(CountMatrices(instance, false));
  Rng rng(seed);

  double sum = 0.0, sum_sq = 0.0;
  std::vector<int64_t> rem(rows);
  for (int64_t s = 0; s < samples; ++s) {
    std::copy(instance.x_counts.begin(), instance.x_counts.end(),
              rem.begin());
    double log10_w = 0.0;
    bool dead = false;
    for (int d = 0; d < diagonals && !dead; ++d) {
      const auto [lo, hi] = DiagonalRows(instance, d);
      const int closing = d - instance.noise_size + 1;
      int64_t left = instance.z_counts[d];
      for (int i = lo; i <= hi && !dead; ++i) {
        int64_t v;
        if (i == closing) {
          v = rem[i];
          if (v > left || (i == hi && v != left)) dead = true;
        } else if (i == hi) {
          v = left;
          if (v > rem[i]) dead = true;
        } else {
          int64_t later = 0;
          for (int c = i + 1; c <= hi; ++c) later += rem[c];
          const int64_t low = std::max<int64_t>(0, left - later);
          const int64_t high = std::min(rem[i], left);
          if (low > high) {
            dead = true;
            break;
          }
          v = low + static_cast<int64_t>(rng.UniformInt(high - low + 1));
          log10_w += std::log10(static_cast<double>(high - low + 1));
        }
        if (dead) break;
        rem[i] -= v;
        left -= v;
      }
    }
    const double w = dead ? 0.0 : std::pow(10.0, log10_w - log10_denominator);
    sum += w;
    sum_sq += w * w;
  }

  MonteCarloAuditResult out;
  out.samples = samples;
  out.estimate = sum / samples;
  if (samples > 1) {
    const double var = std::max(
        0.0, (sum_sq - samples * out.estimate * out.estimate) / (samples - 1));
    out.std_error = std::sqrt(var / samples);
    out.std_error_defined = true;
  } else {
    out.std_error = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace obfus
