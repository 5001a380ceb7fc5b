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

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "obfus/io.h"

namespace obfus {
namespace {

int64_t Total(const std::vector<GroupedClass>& groups) {
  int64_t t = 0;
  for (const GroupedClass& g : groups) t += g.count;
  return t;
}

TEST(SplitGroupedTest, SingletonGroupsUnchanged) {
  const std::vector<GroupedClass> groups = {
      {1, 1, 7}, {2, 2, 0}, {3, 3, 12}};
  const Histogram h = SplitGrouped(groups, 4.8, std::nullopt);
  EXPECT_EQ(h, Histogram(1, {7, 0, 12}));
}

TEST(SplitGroupedTest, TwoValueGroupFollowsPoissonRatio) {
  // pmf(3) / pmf(2) = 4.8 / 3, so the exact shares are 100/2.6 and
  // 160/2.6: 38.46 and 61.54.
  const std::vector<GroupedClass> groups = {{2, 3, 100}};
  const Histogram h = SplitGrouped(groups, 4.8, std::nullopt);
  EXPECT_EQ(h, Histogram(2, {38, 62}));
}

TEST(SplitGroupedTest, OpenClassSpreadsToCap) {
  const std::vector<GroupedClass> groups = {{0, 1, 10}, {2, std::nullopt, 50}};
  const Histogram h = SplitGrouped(groups, 2.0, 6);
  EXPECT_EQ(h.support(), (IntRange{0, 6}));
  // Oracle: Poisson(2) weights 2^k / k! on 2..6, rescaled to 50.
  std::vector<double> w;
  for (int k = 2; k <= 6; ++k) w.push_back(std::pow(2.0, k) / std::tgamma(k + 1));
  const double norm = std::accumulate(w.begin(), w.end(), 0.0);
  for (int k = 2; k <= 6; ++k) {
    EXPECT_LE(std::abs(h.CountAt(k) - 50 * w[k - 2] / norm), 1.0) << k;
  }
  EXPECT_EQ(DefaultSplitCap(groups, 2.0), 8);
  EXPECT_EQ(SplitGrouped(groups, 2.0, std::nullopt).support_max(), 8);
}

TEST(SplitGroupedTest, ConservesEveryGroupExactly) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<GroupedClass> groups;
    int start = static_cast<int>(gen() % 3);
    const int n_groups = 1 + static_cast<int>(gen() % 5);
    for (int g = 0; g < n_groups; ++g) {
      const int width = 1 + static_cast<int>(gen() % 4);
      const int64_t count = static_cast<int64_t>(gen() % 1000003);
      if (g + 1 == n_groups && trial % 2 == 0) {
        groups.push_back({start, std::nullopt, count});
      } else {
        groups.push_back({start, start + width - 1, count});
      }
      start += width;
    }
    const double mean = 0.5 + (gen() % 100) / 10.0;
    const Histogram h = SplitGrouped(groups, mean, std::nullopt);
    EXPECT_EQ(h.total(), Total(groups));
    EXPECT_EQ(h.support_min(), groups.front().start);
    for (size_t g = 0; g < groups.size(); ++g) {
      const int last = groups[g].end ? *groups[g].end : h.support_max();
      int64_t sum = 0;
      for (int v = groups[g].start; v <= last; ++v) sum += h.CountAt(v);
      EXPECT_EQ(sum, groups[g].count);
    }
  }
}

TEST(SplitGroupedTest, RejectsMalformedTables) {
  const std::vector<GroupedClass> gap = {{1, 1, 5}, {3, 4, 5}};
  EXPECT_THROW(SplitGrouped(gap, 2.0, std::nullopt), std::invalid_argument);
  const std::vector<GroupedClass> open_middle = {
      {1, std::nullopt, 5}, {3, 4, 5}};
  EXPECT_THROW(SplitGrouped(open_middle, 2.0, 9), std::invalid_argument);
  const std::vector<GroupedClass> low_cap = {{1, 1, 5}, {2, std::nullopt, 5}};
  EXPECT_THROW(SplitGrouped(low_cap, 2.0, 1), std::invalid_argument);
  const std::vector<GroupedClass> negative = {{1, 1, -5}};
  EXPECT_THROW(SplitGrouped(negative, 2.0, std::nullopt),
               std::invalid_argument);
  const std::vector<GroupedClass> zero_mass = {{1, 3, 5}};
  EXPECT_THROW(SplitGrouped(zero_mass, 0.0, std::nullopt),
               std::invalid_argument);
  EXPECT_THROW(SplitGrouped(std::vector<GroupedClass>{}, 2.0, std::nullopt),
               std::invalid_argument);
}

TEST(SplitGroupedTest, HouseholdTableKeepsPublishedTotal) {
  std::ifstream in(std::string(OBFUS_DATA_DIR) +
                   "/household_size_grouped.csv");
  ASSERT_TRUE(in);
  const std::vector<GroupedClass> groups = ParseGroupedCsv(in);
  const Histogram h = SplitGrouped(groups, 4.8, 22);
  EXPECT_EQ(h.support(), (IntRange{1, 22}));
  EXPECT_EQ(h.total(), Total(groups));
  for (int64_t c : h.counts()) EXPECT_GT(c, 0);
}

}  // namespace
}  // namespace obfus
