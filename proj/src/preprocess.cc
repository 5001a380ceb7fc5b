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
#include "obfus/preprocess.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace obfus {
namespace {

double LogPoissonPmf(int k, double mean) {
  if (mean == 0.0) {
    return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  return k * std::log(mean) - mean - std::lgamma(k + 1.0);
}

}  // namespace

int DefaultSplitCap(std::span<const GroupedClass> groups,
                    double poisson_mean) {
  if (groups.empty()) throw std::invalid_argument("no groups");
  const GroupedClass& top = groups.back();
  const int span = static_cast<int>(std::ceil(3.0 * poisson_mean));
  return top.end ? *top.end : top.start + span;
}

Histogram SplitGrouped(std::span<const GroupedClass> groups,
                       double poisson_mean, std::optional<int> cap) {
  if (groups.empty()) throw std::invalid_argument("no groups");
  if (!(poisson_mean >= 0.0) || !std::isfinite(poisson_mean)) {
    throw std::invalid_argument("Poisson mean must be finite and >= 0");
  }
  const int upper = cap.value_or(DefaultSplitCap(groups, poisson_mean));
  int expected_start = groups.front().start;
  for (size_t g = 0; g < groups.size(); ++g) {
    const GroupedClass& cls = groups[g];
    if (cls.count < 0) throw std::invalid_argument("group counts must be >= 0");
    if (cls.start != expected_start) {
      throw std::invalid_argument(
          "groups must be ordered, disjoint and contiguous (expected a group "
          "starting at " + std::to_string(expected_start) + ")");
    }
    if (!cls.end && g + 1 != groups.size()) {
      throw std::invalid_argument("only the last group may be open");
    }
    if (cls.end && *cls.end < cls.start) {
      throw std::invalid_argument("group end precedes its start");
    }
    if (!cls.end && upper < cls.start) {
      throw std::invalid_argument("cap must be >= the open class start");
    }
    expected_start = (cls.end ? *cls.end : upper) + 1;
  }

  const int lo = groups.front().start;
  const int hi = expected_start - 1;
  std::vector<int64_t> counts(hi - lo + 1, 0);
  for (const GroupedClass& cls : groups) {
    const int last = cls.end ? *cls.end : upper;
    const int width = last - cls.start + 1;
    // Poisson weights relative to the group's largest, to stay finite.
    std::vector<double> logw(width);
    for (int k = 0; k < width; ++k) {
      logw[k] = LogPoissonPmf(cls.start + k, poisson_mean);
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    if (!std::isfinite(top)) {
      throw std::invalid_argument(
          "Poisson mass is zero on group starting at " +
          std::to_string(cls.start) + "; cannot apportion its count");
    }
    std::vector<double> share(width);
    for (int k = 0; k < width; ++k) share[k] = std::exp(logw[k] - top);
    const double norm = std::accumulate(share.begin(), share.end(), 0.0);

    std::vector<int64_t> whole(width);
    std::vector<std::pair<double, int>> remainder(width);
    int64_t assigned = 0;
    for (int k = 0; k < width; ++k) {
      const double exact = static_cast<double>(cls.count) * share[k] / norm;
      whole[k] = static_cast<int64_t>(std::floor(exact));
      remainder[k] = {exact - static_cast<double>(whole[k]), k};
      assigned += whole[k];
    }
    // Largest fractional parts first; lower value wins a tie.
    std::stable_sort(remainder.begin(), remainder.end(),
                     [](const auto& a, const auto& b) {
                       return a.first > b.first;
                     });
    int64_t left = cls.count - assigned;
    for (int t = 0; left > 0; t = (t + 1) % width, --left) {
      ++whole[remainder[t].second];
    }
    for (int k = 0; k < width; ++k) {
      counts[cls.start + k - lo] += whole[k];
    }
  }
  return Histogram(lo, std::move(counts));
}

}  // namespace obfus
