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


#include "obfus/estimators.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "gtest/gtest.h"
#include "obfus/obfuscate.h"
#include "obfus/synth.h"

namespace obfus {
namespace {

LikelihoodModel IdentityModel(std::vector<int64_t> counts) {
  const int n = static_cast<int>(counts.size());
  ObfuscationScheme scheme{NoiseSpec(Pmf::PointMass(0)), {}, {}};
  return LikelihoodModel(BuildMixingMatrix({0, n - 1}, scheme),
                         std::move(counts), scheme.noise);
}

// Masked counts N * (M p) for p with denominator d, so that every count is
// an exact integer when N = m * d.
std::vector<int64_t> ExactMaskedCounts(const std::vector<int64_t>& numer,
                                       int m) {
  const int x_len = static_cast<int>(numer.size());
  std::vector<int64_t> obs(x_len + m - 1, 0);
  for (int x = 0; x < x_len; ++x) {
    for (int y = 0; y < m; ++y) obs[x + y] += numer[x];
  }
  return obs;
}

double Sum(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

TEST(MethodNameTest, RoundTrip) {
  for (Method m : {Method::kLeastSquares, Method::kLeastSquaresQr,
                   Method::kMleForward, Method::kMleBackward,
                   Method::kMleCombined, Method::kCoordinate,
                   Method::kEmpirical}) {
    EXPECT_EQ(ParseMethod(MethodName(m)), m);
  }
  EXPECT_FALSE(ParseMethod("sqp").has_value());
}

TEST(LsConstrainedTest, IdentityNoiseGivesEmpirical) {
  LikelihoodModel model = IdentityModel({10, 20, 30, 40});
  for (bool qr : {false, true}) {
    EstimateReport r = LsConstrained(model, qr);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.p_hat[i], (i + 1) / 10.0, 1e-12);
    EXPECT_TRUE(r.negative_components.empty());
  }
}

TEST(LsConstrainedTest, SolverPathsAgreeAndSumToOne) {
  std::mt19937_64 gen(21);
  std::uniform_int_distribution<int64_t> c(0, 3000);
  for (int trial = 0; trial < 20; ++trial) {
    const int x_len = 3 + trial % 11;
    const int m = 1 + trial % 6;
    ObfuscationScheme scheme{NoiseSpec::DiscreteUniform(0, m - 1), {}, {}};
    MixingMatrix mix = BuildMixingMatrix({0, x_len - 1}, scheme);
    std::vector<int64_t> obs(mix.rows());
    for (auto& o : obs) o = c(gen);
    obs[0] += 1;
    LikelihoodModel model(mix, obs, scheme.noise);
    EstimateReport normal = LsConstrained(model, false);
    EstimateReport qr = LsConstrained(model, true);
    for (int i = 0; i < x_len; ++i) {
      EXPECT_NEAR(normal.p_hat[i], qr.p_hat[i], 1e-8) << trial;
    }
    EXPECT_NEAR(Sum(normal.p_hat), 1.0, 1e-9);
    EXPECT_NEAR(Sum(qr.p_hat), 1.0, 1e-9);
  }
}

TEST(LsConstrainedTest, GeneratedDataHasNegativeComponents) {
  Histogram raw = GenPoissonMixture({.seed = 7});
  ObfuscationScheme scheme{NoiseSpec::DiscreteUniform(0, 10), {}, {}};
  LikelihoodModel model = BuildLikelihoodModel(
      Publish(Mask(raw, scheme, 11), scheme, raw.support()));
  EstimateReport r = LsConstrained(model, false);
  EXPECT_FALSE(r.negative_components.empty());
  for (int i : r.negative_components) EXPECT_LT(r.p_hat[i], 0.0);
  EXPECT_TRUE(std::isnan(r.final_loglik));
}

TEST(LsConstrainedTest, RankDeficientDesignNamesColumns) {
  // With the bucket at 22, X = 21 and X = 22 both land in it with
  // certainty and cannot be told apart.
  ObfuscationScheme scheme{NoiseSpec::DiscreteUniform(1, 10), 22, {}};
  MixingMatrix mix = BuildMixingMatrix({1, 22}, scheme);
  LikelihoodModel model(mix, std::vector<int64_t>(mix.rows(), 5), scheme.noise,
                        22);
  try {
    LsConstrained(model, false);
    FAIL() << "expected rank failure";
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("rank 21 of 22"), std::string::npos) << what;
    EXPECT_TRUE(what.find("X = 21") != std::string::npos ||
                what.find("X = 22") != std::string::npos)
        << what;
  }
}

TEST(MleForwardTest, IdentityNoiseTwoClasses) {
  EstimateReport r = MleForward(std::vector<int64_t>{30, 70}, 1, 2);
  EXPECT_DOUBLE_EQ(r.p_hat[0], 0.3);
  EXPECT_DOUBLE_EQ(r.p_hat[1], 0.7);
  r = MleBackward(std::vector<int64_t>{30, 70}, 1, 2);
  EXPECT_DOUBLE_EQ(r.p_hat[0], 0.3);
  EXPECT_DOUBLE_EQ(r.p_hat[1], 0.7);
}

TEST(MleForwardTest, ElevenFoldFirstComponent) {
  // 23 masked classes, 2% of the mass in the lowest one.
  std::vector<int64_t> obs(23, 0);
  obs[0] = 20;
  obs[1] = 980;
  EstimateReport r = MleForward(obs, 11, 13);
  EXPECT_NEAR(r.p_hat[0], 0.22, 1e-15);
}

TEST(MleForwardTest, ExactInputRecoversGrowingWindow) {
  const std::vector<int64_t> numer = {300, 200, 140, 100, 70, 50, 40,
                                      30,  25,  20,  12,  8,  5};
  const int64_t d = std::accumulate(numer.begin(), numer.end(), int64_t{0});
  const std::vector<int64_t> obs = ExactMaskedCounts(numer, 11);
  EstimateReport fwd = MleForward(obs, 11, 13);
  for (int j = 0; j <= 10; ++j) {
    EXPECT_NEAR(fwd.p_hat[j], static_cast<double>(numer[j]) / d, 1e-9) << j;
  }
  // Past the window the difference picks up p_j - p_{j-11}.
  EXPECT_NEAR(fwd.p_hat[11], static_cast<double>(numer[11] - numer[0]) / d,
              1e-9);
  EXPECT_FALSE(fwd.warnings.empty());
  EXPECT_NEAR(Sum(fwd.p_hat), 1.0, 1e-12);

  EstimateReport bwd = MleBackward(obs, 11, 13);
  for (int j = 2; j <= 12; ++j) {
    EXPECT_NEAR(bwd.p_hat[j], static_cast<double>(numer[j]) / d, 1e-9) << j;
  }
}

TEST(MleBackwardTest, ReversalSymmetry) {
  std::mt19937_64 gen(31);
  std::uniform_int_distribution<int64_t> c(0, 900);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 5;
    const int x_len = 2 + trial % 9;
    std::vector<int64_t> obs(x_len + m - 1);
    for (auto& o : obs) o = c(gen) + 1;
    std::vector<int64_t> reversed(obs.rbegin(), obs.rend());
    std::vector<double> fwd = MleForward(obs, m, x_len).p_hat;
    std::vector<double> bwd = MleBackward(reversed, m, x_len).p_hat;
    std::reverse(bwd.begin(), bwd.end());
    for (int j = 0; j < x_len; ++j) EXPECT_NEAR(bwd[j], fwd[j], 1e-12);
  }
}

TEST(MleDifferenceTest, WrongLengthRejected) {
  EXPECT_THROW(MleForward(std::vector<int64_t>{1, 2, 3}, 11, 13),
               std::invalid_argument);
  EXPECT_THROW(MleBackward(std::vector<int64_t>{1, 2, 3}, 2, 3),
               std::invalid_argument);
}

TEST(MleCombinedTest, UnimodalHistogramHasNoNegatives) {
  // Masked counts from a smooth unimodal truth.
  const std::vector<int64_t> numer = {20, 60, 120, 180, 200, 170, 120,
                                      70, 35, 15,  6,   3,   1};
  const std::vector<int64_t> obs = ExactMaskedCounts(numer, 11);
  EstimateReport r = MleCombined(obs, 11, 13);
  EXPECT_TRUE(r.negative_components.empty());
  EXPECT_NEAR(Sum(r.p_hat), 1.0, 1e-12);
  for (const auto& w : r.warnings) {
    EXPECT_EQ(w.find("not unimodal"), std::string::npos) << w;
  }
}

TEST(MleCombinedTest, IncreasingHistogramEqualsForward) {
  std::vector<int64_t> obs = {1, 2, 2, 3, 5, 8, 13, 21, 34};
  EstimateReport fwd = MleForward(obs, 3, 7);
  EstimateReport comb = MleCombined(obs, 3, 7);
  const double s = Sum(fwd.p_hat);
  for (int j = 0; j < 7; ++j) EXPECT_NEAR(comb.p_hat[j], fwd.p_hat[j] / s, 1e-15);
}

TEST(MleCombinedTest, OscillatingHistogramWarns) {
  std::vector<int64_t> obs = {5, 9, 4, 10, 3, 8, 2, 6, 1};
  EstimateReport r = MleCombined(obs, 3, 7);
  bool flagged = false;
  for (const auto& w : r.warnings) flagged |= w.find("not unimodal") != std::string::npos;
  EXPECT_TRUE(flagged);
}

TEST(CoordinateMleTest, TwoClassIdentityHitsGridPoint) {
  EstimateReport r = CoordinateMle(IdentityModel({30, 70}));
  EXPECT_EQ(r.p_hat[0], 0.3);
  EXPECT_EQ(r.p_hat[1], 0.7);
  EXPECT_TRUE(r.negative_components.empty());
}

TEST(CoordinateMleTest, TraceNonDecreasingAndIteratesOnSimplex) {
  Histogram raw = GenPoissonMixture({.n = 200'000, .seed = 19});
  ObfuscationScheme scheme{NoiseSpec::DiscreteUniform(0, 10), {}, {}};
  LikelihoodModel model = BuildLikelihoodModel(
      Publish(Mask(raw, scheme, 20), scheme, raw.support()));
  CoordinateMleOptions options;
  options.record_trace = true;
  int updates = 0;
  options.observer = [&](int, int, std::span<const double> p) {
    ++updates;
    double s = 0.0;
    for (double v : p) {
      ASSERT_GE(v, 0.0);
      s += v;
    }
    ASSERT_NEAR(s, 1.0, 1e-12);
  };
  EstimateReport r = CoordinateMle(model, options);
  ASSERT_EQ(static_cast<int>(r.trace.size()), updates + 1);
  for (size_t k = 1; k < r.trace.size(); ++k) {
    EXPECT_GE(r.trace[k], r.trace[k - 1]);
  }
  EXPECT_NEAR(r.trace.back(), r.final_loglik, 1e-9 * std::abs(r.final_loglik));
  EXPECT_GT(r.iterations, 1);
}

double GridOracle(const std::vector<int64_t>& n) {
  std::vector<double> log_grid(1001);
  for (int k = 0; k <= 1000; ++k) log_grid[k] = std::log(k / 1000.0);
  double oracle = -INFINITY;
  for (int i = 0; i <= 1000; ++i) {
    for (int j = 0; i + j <= 1000; ++j) {
      const int k = 1000 - i - j;
      double l = 0.0;
      if (n[0]) l += n[0] * log_grid[i];
      if (n[1]) l += n[1] * log_grid[j];
      if (n[2]) l += n[2] * log_grid[k];
      oracle = std::max(oracle, l);
    }
  }
  return oracle;
}

TEST(CoordinateMleTest, AllPairsWithRefinementMatchesGridOracle) {
  // Sampled subset; the exhaustive sweep over all counts <= 30 runs in the
  // acceptance binary.
  CoordinateMleOptions options;
  options.schedule = PairSchedule::kAllPairs;
  options.refine_levels = 3;
  std::mt19937_64 gen(41);
  std::uniform_int_distribution<int64_t> c(0, 30);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<int64_t> n = {c(gen), c(gen), c(gen)};
    if (n[0] + n[1] + n[2] == 0) n[1] = 1;
    EstimateReport r = CoordinateMle(IdentityModel(n), options);
    EXPECT_GE(r.final_loglik, GridOracle(n) - 1e-6)
        << n[0] << "," << n[1] << "," << n[2];
  }
  // The instance that traps adjacent pairs.
  EstimateReport r = CoordinateMle(IdentityModel({15, 0, 26}), options);
  EXPECT_NEAR(r.p_hat[0], 15.0 / 41, 1e-6);
  EXPECT_NEAR(r.p_hat[2], 26.0 / 41, 1e-6);
}

TEST(CoordinateMleTest, AdjacentPairsFreezeAcrossAnEmptyMiddleClass) {
  // From the uniform start the first sweep empties class 1 and splits
  // 2/3, 1/3 between its neighbours; no adjacent move can rebalance them.
  EstimateReport r = CoordinateMle(IdentityModel({15, 0, 26}));
  EXPECT_NEAR(r.p_hat[0], 2.0 / 3, 1e-9);
  EXPECT_EQ(r.p_hat[1], 0.0);
  EXPECT_NEAR(r.p_hat[2], 1.0 / 3, 1e-9);
  EXPECT_LT(r.final_loglik, GridOracle({15, 0, 26}) - 5.0);
}

TEST(CoordinateMleTest, RefinementReachesBetweenGridPoints) {
  // 1/3 is not on the 1/1000 grid; three levels reach spacing 1e-6.
  CoordinateMleOptions options;
  EstimateReport r = CoordinateMle(IdentityModel({1, 2}), options);
  EXPECT_GT(std::abs(r.p_hat[0] - 1.0 / 3), 1e-4);
  options.refine_levels = 3;
  r = CoordinateMle(IdentityModel({1, 2}), options);
  EXPECT_NEAR(r.p_hat[0], 1.0 / 3, 1e-6);
  options.refine_levels = -1;
  EXPECT_THROW(CoordinateMle(IdentityModel({1, 2}), options),
               std::invalid_argument);
}

TEST(CoordinateMleTest, CustomStartAndInfeasibleStart) {
  LikelihoodModel model = IdentityModel({3, 0, 7});
  CoordinateMleOptions options;
  options.init = {0.0, 1.0, 0.0};
  EXPECT_THROW(CoordinateMle(model, options), std::runtime_error);
  options.init = {0.3, 0.0, 0.7};
  EstimateReport r = CoordinateMle(model, options);
  EXPECT_EQ(r.p_hat, options.init);
  EXPECT_EQ(r.iterations, 1);
  options.init = {0.2, 0.3, 0.5};
  options.schedule = PairSchedule::kAllPairs;
  r = CoordinateMle(model, options);
  EXPECT_NEAR(r.p_hat[0], 0.3, 1e-3);
  EXPECT_NEAR(r.p_hat[2], 0.7, 1e-3);
  options.init = {0.5, 0.6, 0.1};
  EXPECT_THROW(CoordinateMle(model, options), std::invalid_argument);
}

TEST(CoordinateMleTest, EpochLimitWarns) {
  LikelihoodModel model = IdentityModel({1, 2, 3, 4, 5, 6});
  CoordinateMleOptions options;
  options.max_epochs = 1;
  EstimateReport r = CoordinateMle(model, options);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(MergeClassesTest, IdentityMergedMassIsEmpiricalSum) {
  LikelihoodModel model = IdentityModel({10, 25, 15, 50});
  LikelihoodModel merged = MergeClasses(model, 1);
  EXPECT_EQ(merged.x_len(), 3);
  for (double s : merged.mixing.ColumnSums()) EXPECT_NEAR(s, 1.0, 1e-15);
  EXPECT_EQ(merged.obs, model.obs);
  EstimateReport r = CoordinateMle(merged);
  ASSERT_EQ(r.classes.size(), 3u);
  EXPECT_EQ(r.classes[1], (IntRange{1, 2}));
  EXPECT_NEAR(r.p_hat[1], 0.40, 1e-3);
  EXPECT_NEAR(r.p_hat[0], 0.10, 1e-3);
  EXPECT_NEAR(r.p_hat[2], 0.50, 1e-3);
  EXPECT_THROW(MergeClasses(IdentityModel({4}), 0), std::invalid_argument);
  EXPECT_THROW(MergeClasses(model, 3), std::invalid_argument);
}

TEST(MergeClassesTest, DifferenceEstimatorsRefuseMergedModels) {
  ObfuscationScheme scheme{NoiseSpec::DiscreteUniform(0, 2), {}, {}};
  LikelihoodModel model(BuildMixingMatrix({0, 3}, scheme),
                        {1, 2, 3, 4, 5, 6}, scheme.noise);
  EXPECT_NO_THROW(Estimate(model, Method::kMleForward));
  EXPECT_THROW(Estimate(MergeClasses(model, 0), Method::kMleForward),
               std::invalid_argument);
  EXPECT_THROW(Estimate(MergeMaskedValues(model, 0), Method::kMleBackward),
               std::invalid_argument);
}

TEST(AggregateToClassesTest, SumsPerClass) {
  std::vector<double> v = {0.1, 0.2, 0.3, 0.4};
  std::vector<IntRange> classes = {{0, 0}, {1, 2}, {3, 3}};
  std::vector<double> a = AggregateToClasses(v, 0, classes);
  EXPECT_NEAR(a[1], 0.5, 1e-15);
  EXPECT_EQ(a[2], 0.4);
}

// X on 0..7 with noise uniform 0..3 and masked counts at their expectation
// (N = 4000) except that masked value 8 is empty, its count moved up one.
class EmptyMaskedValueTest : public testing::Test {
 protected:
  EmptyMaskedValueTest()
      : truth_({0.40, 0.25, 0.15, 0.10, 0.05, 0.03, 0.015, 0.005}),
        scheme_{NoiseSpec::DiscreteUniform(0, 3), {}, {}} {}

  LikelihoodModel Model() const {
    MixingMatrix mix = BuildMixingMatrix({0, 7}, scheme_);
    std::vector<int64_t> obs;
    for (double r : mix.Apply(truth_)) obs.push_back(std::llround(r * 4000));
    obs[9] += obs[8];
    obs[8] = 0;
    return LikelihoodModel(mix, obs, scheme_.noise);
  }

  double ErrorNear(const std::vector<double>& p) const {
    // Classes 5..7 can reach masked value 8.
    double e = 0.0;
    for (int i = 4; i < 8; ++i) e = std::max(e, std::abs(p[i] - truth_[i]));
    return e;
  }

  std::vector<double> truth_;
  ObfuscationScheme scheme_;
};

TEST_F(EmptyMaskedValueTest, EstimateDegradesThenRecoversAfterMerge) {
  LikelihoodModel model = Model();
  EstimateReport before = CoordinateMle(model);
  // The empty row pushes one class to zero and its neighbours off.
  EXPECT_LT(before.p_hat[5], 1e-3);
  EXPECT_GT(ErrorNear(before.p_hat), 0.02);

  LikelihoodModel merged = MergeEmptyMaskedValues(model);
  EXPECT_EQ(merged.mixing.rows(), model.mixing.rows() - 1);
  EXPECT_EQ(merged.total(), model.total());
  for (double s : merged.mixing.ColumnSums()) EXPECT_NEAR(s, 1.0, 1e-15);
  EstimateReport after = CoordinateMle(merged);
  EXPECT_LT(ErrorNear(after.p_hat), 0.005);
  double linf_before = 0.0, linf_after = 0.0;
  for (int i = 0; i < 8; ++i) {
    linf_before = std::max(linf_before, std::abs(before.p_hat[i] - truth_[i]));
    linf_after = std::max(linf_after, std::abs(after.p_hat[i] - truth_[i]));
  }
  EXPECT_LT(linf_after, linf_before);
}

TEST(MergeEmptyMaskedValuesTest, LeavesOuterZerosAlone) {
  ObfuscationScheme scheme{NoiseSpec::DiscreteUniform(0, 1), {}, {}};
  MixingMatrix mix = BuildMixingMatrix({0, 5}, scheme);
  LikelihoodModel model(mix, {0, 4, 0, 0, 3, 2, 0}, scheme.noise);
  LikelihoodModel merged = MergeEmptyMaskedValues(model);
  EXPECT_EQ(merged.obs, (std::vector<int64_t>{0, 4, 3, 2, 0}));
  EXPECT_EQ(merged.mixing.row_values(), (std::vector<int>{0, 1, 2, 5, 6}));
}

TEST(EstimateTest, DispatchAndGuards) {
  LikelihoodModel id = IdentityModel({30, 70});
  EstimateReport e = Estimate(id, Method::kEmpirical);
  EXPECT_DOUBLE_EQ(e.p_hat[0], 0.3);
  EXPECT_EQ(Estimate(id, Method::kCoordinate).p_hat[0], 0.3);

  ObfuscationScheme truncated{NoiseSpec::DiscreteUniform(0, 2), 4, {}};
  LikelihoodModel t(BuildMixingMatrix({0, 3}, truncated), {1, 2, 3, 4, 5},
                    truncated.noise, 4);
  EXPECT_THROW(Estimate(t, Method::kMleForward), std::invalid_argument);
  EXPECT_THROW(Estimate(t, Method::kMleCombined), std::invalid_argument);
  EXPECT_NO_THROW(Estimate(t, Method::kCoordinate));

  ObfuscationScheme skewed{NoiseSpec(Pmf(0, {0.25, 0.75})), {}, {}};
  LikelihoodModel s(BuildMixingMatrix({0, 2}, skewed), {1, 2, 3, 4},
                    skewed.noise);
  EXPECT_THROW(Estimate(s, Method::kMleBackward), std::invalid_argument);
  EXPECT_THROW(Estimate(s, Method::kEmpirical), std::invalid_argument);
  EXPECT_NO_THROW(Estimate(s, Method::kLeastSquares));
}

}  // namespace
}  // namespace obfus
