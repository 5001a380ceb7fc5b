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
// Recovering the true PMF p from a masked histogram.
//
//   * LsConstrained: least squares of the empirical masked PMF on M subject
//     to sum(p) = 1, through the normal equations or a QR factorization.
//   * MleForward / MleBackward: closed-form successive differences of the
//     masked frequencies under uniform noise, anchored at the bottom or the
//     top of the support, and MleCombined which picks between them.
//   * CoordinateMle: constrained MLE by grid search over the split of mass
//     between adjacent coordinates; stays on the simplex at every step.
//
// Least squares and difference estimators may return negative components.
// They are listed in the report, never clamped.

#ifndef OBFUS_ESTIMATORS_H_
#define OBFUS_ESTIMATORS_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "obfus/core_model.h"
#include "obfus/likelihood.h"

namespace obfus {

enum class Method {
  kLeastSquares,
  kLeastSquaresQr,
  kMleForward,
  kMleBackward,
  kMleCombined,
  kCoordinate,
  kEmpirical,
};

// CLI spelling: ls, ls-qr, mle-fwd, mle-bwd, mle-combined, coord, empirical.
std::string_view MethodName(Method method);
std::optional<Method> ParseMethod(std::string_view name);

struct EstimateReport {
  Method method = Method::kCoordinate;
  std::vector<double> p_hat;
  // X values covered by each component of p_hat.
  std::vector<IntRange> classes;
  std::vector<int> negative_components;
  int iterations = 0;
  double final_loglik = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> warnings;
  // Log-likelihood at the start and after every accepted pair update
  // (coordinate search with record_trace only).
  std::vector<double> trace;
};

EstimateReport LsConstrained(const LikelihoodModel& model, bool use_qr);

// obs are the untruncated masked counts starting at the smallest reachable
// masked value; m is the size of the uniform noise support and x_len the
// number of X classes, so obs.size() == x_len + m - 1.
//
// Forward: p_0 = m r_0, p_j = m (r_j - r_{j-1}) for 1 <= j <= x_len - 2,
// p_last = 1 - sum. Components with j >= m estimate p_j - p_{j-m}; a warning
// is attached when x_len - 2 > m - 1.
EstimateReport MleForward(std::span<const int64_t> obs, int m, int x_len);
// Mirror image anchored at the top of the support.
EstimateReport MleBackward(std::span<const int64_t> obs, int m, int x_len);
// Component j comes from the forward estimate when obs[j] >= obs[j-1] and
// from the backward one otherwise; the result is rescaled to sum to one.
EstimateReport MleCombined(std::span<const int64_t> obs, int m, int x_len);

enum class PairSchedule {
  // (0,1), (1,2), ..., (n-2,n-1).
  kAdjacent,
  // Every (i, j) with i < j, ordered by i then j.
  kAllPairs,
};

struct CoordinateMleOptions {
  // Starting point on the simplex; uniform when empty.
  std::vector<double> init;
  int grid = 1000;
  PairSchedule schedule = PairSchedule::kAdjacent;
  // After the grid search settles, each further level searches G + 1
  // points around the current split, spaced ten times finer than the
  // level before.
  int refine_levels = 0;
  int max_epochs = 500;
  // Stop once a full sweep gains less than this in log-likelihood.
  double tol = 1e-8;
  bool record_trace = false;
  // Called after every accepted pair update with (epoch, lower index of
  // the pair, p).
  std::function<void(int, int, std::span<const double>)> observer;
};

// Sweeps pairs (0,1), (1,2), ... For a pair with mass s, tries
// p_i = s j / G, p_{i+1} = s - p_i for j = 0..G and moves to the best
// candidate only on a strict improvement (smallest j among ties).
// max_epochs bounds the sweeps of each refinement level separately.
// Throws std::runtime_error("infeasible start") when the starting point has
// zero likelihood.
//
// With adjacent pairs, a class that has been emptied blocks any exchange
// between its neighbours, so a zero-count interior class can freeze the
// outer ratio away from the maximum. kAllPairs with refine_levels >= 2
// avoids this at a higher cost per sweep.
EstimateReport CoordinateMle(const LikelihoodModel& model,
                             const CoordinateMleOptions& options = {});

// Model in which classes i and i + 1 are estimated as one.
LikelihoodModel MergeClasses(const LikelihoodModel& model, int i);

// Model in which masked rows k and k + 1 are observed as one event: counts
// and rows of M are added. Removes an empty interior masked value, which
// otherwise pulls the classes that can reach it towards zero.
LikelihoodModel MergeMaskedValues(const LikelihoodModel& model, int k);

// Merges every empty masked row between the first and the last observed
// value into the row above it.
LikelihoodModel MergeEmptyMaskedValues(const LikelihoodModel& model);

// Sums a per-value vector (indexed from x_support.min) over the given
// classes; used to compare a merged estimate with per-value truth.
std::vector<double> AggregateToClasses(std::span<const double> per_value,
                                       int support_min,
                                       std::span<const IntRange> classes);

struct EstimateOptions {
  CoordinateMleOptions coordinate;
};

// Runs the named method on a model. Difference estimators need uniform noise
// on an untruncated, unmerged model; violations throw std::invalid_argument.
EstimateReport Estimate(const LikelihoodModel& model, Method method,
                        const EstimateOptions& options = {});

}  // namespace obfus

#endif  // OBFUS_ESTIMATORS_H_
