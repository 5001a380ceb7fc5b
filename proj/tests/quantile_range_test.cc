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

#include "obfus/quantile_range.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "gtest/gtest.h"
#include "obfus/core_model.h"

namespace obfus {
namespace {

Pmf UniformPmf(int a, int b) { return NoiseSpec::DiscreteUniform(a, b).pmf(); }

TEST(QuantileTest, PointMassAndUniform) {
  const Pmf five = Pmf::PointMass(5);
  for (double q : {0.001, 0.3, 0.5, 1.0}) EXPECT_EQ(Quantile(five, q), 5);
  const Pmf u = UniformPmf(0, 9);
  EXPECT_EQ(Quantile(u, 0.5), 4);
  EXPECT_EQ(Quantile(u, 0.51), 5);
  EXPECT_EQ(Quantile(u, 0.1), 0);
  EXPECT_EQ(Quantile(u, 1.0), 9);
}

TEST(QuantileTest, RejectsLevelsOutsideUnitInterval) {
  const Pmf u = UniformPmf(0, 3);
  EXPECT_THROW(Quantile(u, 0.0), std::invalid_argument);
  EXPECT_THROW(Quantile(u, -0.1), std::invalid_argument);
  EXPECT_THROW(Quantile(u, 1.0001), std::invalid_argument);
  EXPECT_THROW(Quantile(u, NAN), std::invalid_argument);
}

TEST(QuantileTest, MonotoneInLevel) {
  const Pmf p(2, {0.1, 0.0, 0.05, 0.3, 0.25, 0.0, 0.3});
  int prev = Quantile(p, 0.001);
  for (int k = 2; k <= 1000; ++k) {
    const int cur = Quantile(p, k / 1000.0);
    EXPECT_LE(prev, cur);
    prev = cur;
  }
}

// Order-statistic oracle: the ceil(q n)-th smallest observation.
TEST(QuantileTest, ExactPmfReproducesSortedDataQuantiles) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 5; ++trial) {
    std::uniform_int_distribution<int> value(0, 12);
    const int n = 37 + 50 * trial;
    std::vector<int> data(n);
    for (int& x : data) x = value(gen);
    std::vector<int64_t> counts(13, 0);
    for (int x : data) ++counts[x];
    std::sort(data.begin(), data.end());
    const Pmf p = PmfFromHistogram(Histogram(0, counts));
    for (int k = 1; k <= 1000; ++k) {
      const double q = k / 1000.0;
      const int rank =
          static_cast<int>(std::ceil(q * n - 1e-9 * n));  // 1-based
      EXPECT_EQ(Quantile(p, q), data[std::max(rank, 1) - 1])
          << "n=" << n << " q=" << q;
    }
  }
}

TEST(EstimateMaxTest, PointMassAndTail) {
  EXPECT_EQ(EstimateMax(Pmf::PointMass(7)), 7);
  const Pmf p(0, {0.5, 0.5 - 1e-10, 1e-10});
  EXPECT_EQ(EstimateMax(p), 1);
  EXPECT_EQ(EstimateMax(p, 1e-11), 2);
  EXPECT_EQ(EstimateMax(p, 0.0), 2);
  EXPECT_THROW(EstimateMax(p, -1e-3), std::invalid_argument);
}

TEST(EstimateMaxTest, NonDecreasingAsEpsShrinks) {
  const Pmf p(0, {0.4, 0.3, 0.2, 0.09, 0.009, 0.0009, 0.0001});
  int prev = EstimateMax(p, 0.5);
  for (double eps = 0.25; eps > 1e-15; eps /= 3) {
    const int cur = EstimateMax(p, eps);
    EXPECT_GE(cur, prev);
    prev = cur;
  }
  EXPECT_EQ(prev, 6);
}

TEST(ConvolutionPowerTest, MatchesRepeatedConvolution) {
  const Pmf q = UniformPmf(0, 3);
  Pmf direct = Pmf::PointMass(0);
  for (int k = 0; k <= 9; ++k) {
    const Pmf fast = ConvolutionPower(q, k);
    ASSERT_EQ(fast.support(), direct.support()) << k;
    for (int v = direct.support_min(); v <= direct.support_max(); ++v) {
      EXPECT_NEAR(fast.At(v), direct.At(v), 1e-14);
    }
    direct = Convolve(direct, q);
  }
  EXPECT_THROW(ConvolutionPower(q, -1), std::invalid_argument);
}

TEST(LlnMaxEstimateTest, DeterministicNoiseGivesExactMax) {
  // Masked with constant noise 3: true values 0..12 appear as 3..15.
  std::vector<int64_t> counts(13, 10);
  const Histogram masked(3, counts);
  const NoiseSpec noise(Pmf::PointMass(3));
  for (int rounds : {0, 1, 99, 999}) {
    EXPECT_DOUBLE_EQ(LlnMaxEstimate(masked, noise, rounds, 1), 12.0);
  }
}

TEST(LlnMaxEstimateTest, OverestimatesWithManyRoundsAndIsDeterministic) {
  std::vector<int64_t> counts(23, 2000);
  const Histogram masked(0, counts);
  const NoiseSpec noise = NoiseSpec::DiscreteUniform(0, 10);
  const double a = LlnMaxEstimate(masked, noise, 999, 17);
  EXPECT_EQ(a, LlnMaxEstimate(masked, noise, 999, 17));
  EXPECT_GT(a - 12.0, 50.0);
  EXPECT_THROW(LlnMaxEstimate(masked, noise, -1, 1), std::invalid_argument);
}

}  // namespace
}  // namespace obfus
