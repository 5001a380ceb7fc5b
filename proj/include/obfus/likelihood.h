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
// Masked-data log-likelihood l(p) = sum_k obs_k * log((M p)_k) for plain,
// truncated and widened-support publications, an incremental evaluator for
// two-coordinate moves, and the nested logistic reparameterization of
// increasing probability sequences together with its analytic gradient.
//
// Everything is in probability scale. A formulation that multiplies every
// row of M by a constant c (e.g. writing the tail of a uniform-noise model
// with integer weights) differs by the additive constant sum(obs) * log(c)
// and has the same maximizer.

#ifndef OBFUS_LIKELIHOOD_H_
#define OBFUS_LIKELIHOOD_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "obfus/core_model.h"
#include "obfus/obfuscate.h"

namespace obfus {

// Returned for a positive count on a zero-probability cell.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct LikelihoodModel {
  MixingMatrix mixing;
  // Observed counts aligned with mixing's rows, tail bucket last.
  std::vector<int64_t> obs;
  NoiseSpec noise;
  std::optional<int> truncation_at;

  LikelihoodModel(MixingMatrix m, std::vector<int64_t> counts,
                  NoiseSpec noise_spec, std::optional<int> t = std::nullopt);

  int x_len() const { return mixing.cols(); }
  int64_t total() const;
};

// Model the analyst can build from published data: columns for every
// declared X value, rows for every reachable masked value.
LikelihoodModel BuildLikelihoodModel(const PublishedDataset& data);

// Returns kNegInf when some observed cell has zero probability; 0 * log 0 is
// taken as 0. p must have x_len entries, be >= 0 and sum to 1 within 1e-9.
double Loglik(const LikelihoodModel& model, std::span<const double> p);

// Keeps r = M p and the per-row terms of the log-likelihood for a current p
// so that moves of mass between coordinates i and i + 1 can be scored by
// revisiting only rows where column i or i + 1 is non-zero.
class LoglikEvaluator {
 public:
  LoglikEvaluator(const LikelihoodModel& model, std::span<const double> p);

  double value() const;
  const std::vector<double>& p() const { return p_; }
  const std::vector<double>& r() const { return r_; }

  // Log-likelihood after setting p_i = new_pi and p_{i+1} = new_pi1.
  double Delta(int i, double new_pi, double new_pi1) const;

  // Commits the move scored by Delta.
  void Apply(int i, double new_pi, double new_pi1);
  // Sets p_i and p_j for any two columns; the caller keeps the sum.
  void ApplyPair(int i, int j, double new_pi, double new_pj);

  // Rows with a non-zero entry in column i or i + 1.
  const std::vector<int>& TouchedRows(int i) const { return touched_[i]; }

 private:
  double Term(int k, double r) const;
  void RefreshRow(int k);

  const LikelihoodModel& model_;
  std::vector<double> p_;
  std::vector<double> r_;
  std::vector<double> terms_;
  double finite_sum_ = 0.0;
  int infinite_rows_ = 0;
  std::vector<std::vector<int>> touched_;
};

// Log-likelihood of p with components i and i + 1 replaced; the pair's mass
// must be conserved.
double LoglikDelta(const LikelihoodModel& model, std::span<const double> p,
                   int i, double new_pi, double new_pi1);

// r_k = 1 / (1 + sum_{i >= k} exp(-u_i)), evaluated through a running
// log-sum-exp so that large |u| neither overflows nor produces NaN.
std::vector<double> NestedLogistic(std::span<const double> u);

// Inverse of NestedLogistic for strictly increasing r in (0, 1).
std::vector<double> NestedLogisticInverse(std::span<const double> r);

// Counts for the cumulative-form likelihood
//   l(u) = n_0 log(1 - sum_j r_j(u)) + sum_{j=1}^{n} n_j log r_j(u)
// with counts = (n_0, n_1, ..., n_n) and u of length n.
struct NestedLogisticModel {
  std::vector<int64_t> counts;
};

double NestedLogisticLoglik(const NestedLogisticModel& model,
                            std::span<const double> u);

// dl/du_k for every k:
//   -n_0 * sum_{j<=k} e^{-u_k} / (1 + S_j)^2 / (1 - sum_j r_j)
//   + sum_{j<=k} n_j e^{-u_k} / (1 + S_j),      S_j = sum_{i>=j} e^{-u_i}.
std::vector<double> NestedLogisticLoglikGrad(const NestedLogisticModel& model,
                                             std::span<const double> u);

}  // namespace obfus

#endif  // OBFUS_LIKELIHOOD_H_
