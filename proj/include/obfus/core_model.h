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

// Basic value types shared by every stage of the masking pipeline: integer
// histograms, probability vectors on contiguous integer supports, noise
// specifications and the linear map from a true PMF to the masked PMF.

#ifndef OBFUS_CORE_MODEL_H_
#define OBFUS_CORE_MODEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace obfus {

// Tolerance on |sum(probs) - 1| accepted by Pmf.
inline constexpr double kPmfSumTolerance = 1e-9;

// Closed integer interval [min, max].
struct IntRange {
  int min = 0;
  int max = 0;

  int size() const { return max - min + 1; }
  bool Contains(int v) const { return v >= min && v <= max; }
  bool Contains(const IntRange& other) const {
    return other.min >= min && other.max <= max;
  }
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

// Counts on a contiguous integer support; counts[i] belongs to value
// support_min + i. Interior zeros are kept. A histogram holds at least one
// observation; the constructor throws std::invalid_argument("empty data")
// otherwise.
class Histogram {
 public:
  Histogram(int support_min, std::vector<int64_t> counts);

  int support_min() const { return support_min_; }
  int support_max() const {
    return support_min_ + static_cast<int>(counts_.size()) - 1;
  }
  IntRange support() const { return {support_min(), support_max()}; }
  int size() const { return static_cast<int>(counts_.size()); }
  const std::vector<int64_t>& counts() const { return counts_; }
  int64_t total() const { return total_; }

  // Count at value v; zero outside the support.
  int64_t CountAt(int v) const;

  // Largest / smallest value with a positive count.
  int MaxObserved() const;
  int MinObserved() const;

  // Same data re-expressed on a wider support (zero padded).
  Histogram PaddedTo(IntRange range) const;

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  int support_min_;
  std::vector<int64_t> counts_;
  int64_t total_ = 0;
};

// Probability vector on a contiguous integer support. Construction rejects
// negative entries and sums further than kPmfSumTolerance from one.
class Pmf {
 public:
  Pmf(int support_min, std::vector<double> probs);

  static Pmf PointMass(int value);

  int support_min() const { return support_min_; }
  int support_max() const {
    return support_min_ + static_cast<int>(probs_.size()) - 1;
  }
  IntRange support() const { return {support_min(), support_max()}; }
  int size() const { return static_cast<int>(probs_.size()); }
  const std::vector<double>& probs() const { return probs_; }
  double At(int v) const;
  double Mean() const;

 private:
  int support_min_;
  std::vector<double> probs_;
};

// Additive noise distribution on a finite integer support.
class NoiseSpec {
 public:
  explicit NoiseSpec(Pmf pmf) : pmf_(std::move(pmf)) {}

  // m = b - a + 1 equiprobable values {a, ..., b}, endpoints inclusive.
  static NoiseSpec DiscreteUniform(int a, int b);

  const Pmf& pmf() const { return pmf_; }
  IntRange support() const { return pmf_.support(); }
  int size() const { return pmf_.size(); }
  double Mean() const { return pmf_.Mean(); }
  bool IsUniform() const;

 private:
  Pmf pmf_;
};

// What a publisher does to the data: add noise, optionally collapse every
// masked value >= truncation_at into one bucket labelled truncation_at, and
// optionally announce a wider X-support than the true one.
struct ObfuscationScheme {
  NoiseSpec noise;
  std::optional<int> truncation_at;
  std::optional<IntRange> declared_support;
};

// Linear map r = M * p from a PMF on an X-support to the masked PMF. Row k
// is masked value row_values[k]; when truncated, the last row is the tail
// bucket and row_values.back() is the threshold. Column c covers the X
// values col_classes[c] (a single value unless columns were merged).
class MixingMatrix {
 public:
  MixingMatrix(std::vector<IntRange> col_classes, std::vector<int> row_values,
               std::vector<double> entries, bool has_tail);

  int rows() const { return static_cast<int>(row_values_.size()); }
  int cols() const { return static_cast<int>(col_classes_.size()); }
  IntRange x_support() const {
    return {col_classes_.front().min, col_classes_.back().max};
  }
  const std::vector<IntRange>& col_classes() const { return col_classes_; }
  const std::vector<int>& row_values() const { return row_values_; }
  bool has_tail() const { return has_tail_; }

  double operator()(int row, int col) const {
    return entries_[static_cast<size_t>(row) * cols() + col];
  }
  // Row-major storage, rows() * cols() entries.
  const std::vector<double>& entries() const { return entries_; }

  std::vector<double> Apply(std::span<const double> p) const;
  std::vector<double> ColumnSums() const;

  // Copy in which columns col and col + 1 become one class whose mass is
  // spread evenly over its values; every column still sums to one.
  MixingMatrix WithMergedColumns(int col) const;

 private:
  std::vector<IntRange> col_classes_;
  std::vector<int> row_values_;
  std::vector<double> entries_;
  bool has_tail_;
};

// Empirical PMF n_i / sum(n).
Pmf PmfFromHistogram(const Histogram& h);

// Distribution of X + Y for independent X ~ p, Y ~ q.
Pmf Convolve(const Pmf& p, const Pmf& q);

// Builds M for X on x_support under scheme.noise and scheme.truncation_at.
// declared_support is not consulted here; callers pass the support the
// analyst is allowed to assume.
MixingMatrix BuildMixingMatrix(IntRange x_support,
                               const ObfuscationScheme& scheme);

// Running sums of p.
std::vector<double> Cdf(const Pmf& p);
std::vector<double> Cdf(std::span<const double> probs);

}  // namespace obfus

#endif  // OBFUS_CORE_MODEL_H_
