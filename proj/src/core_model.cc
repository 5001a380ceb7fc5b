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

#include "obfus/core_model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace obfus {

Histogram::Histogram(int support_min, std::vector<int64_t> counts)
    : support_min_(support_min), counts_(std::move(counts)) {
  for (int64_t c : counts_) {
    if (c < 0) throw std::invalid_argument("histogram counts must be >= 0");
    total_ += c;
  }
  if (total_ < 1) throw std::invalid_argument("empty data");
}

int64_t Histogram::CountAt(int v) const {
  if (v < support_min() || v > support_max()) return 0;
  return counts_[v - support_min_];
}

int Histogram::MaxObserved() const {
  for (int i = size() - 1; i >= 0; --i) {
    if (counts_[i] > 0) return support_min_ + i;
  }
  return support_max();  // unreachable, total >= 1
}

int Histogram::MinObserved() const {
  for (int i = 0; i < size(); ++i) {
    if (counts_[i] > 0) return support_min_ + i;
  }
  return support_min_;
}

Histogram Histogram::PaddedTo(IntRange range) const {
  if (!range.Contains(support()) || range.size() < 1) {
    throw std::invalid_argument("padding range must contain the support");
  }
  std::vector<int64_t> out(range.size(), 0);
  std::copy(counts_.begin(), counts_.end(),
            out.begin() + (support_min_ - range.min));
  return Histogram(range.min, std::move(out));
}

Pmf::Pmf(int support_min, std::vector<double> probs)
    : support_min_(support_min), probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("pmf has empty support");
  double sum = 0.0;
  for (double v : probs_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("pmf entries must be finite and >= 0");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kPmfSumTolerance) {
    throw std::invalid_argument("pmf does not sum to 1 (sum = " +
                                std::to_string(sum) + ")");
  }
}

Pmf Pmf::PointMass(int value) { return Pmf(value, {1.0}); }

double Pmf::At(int v) const {
  if (v < support_min() || v > support_max()) return 0.0;
  return probs_[v - support_min_];
}

double Pmf::Mean() const {
  double mean = 0.0;
  for (int i = 0; i < size(); ++i) mean += (support_min_ + i) * probs_[i];
  return mean;
}

NoiseSpec NoiseSpec::DiscreteUniform(int a, int b) {
  if (b < a) throw std::invalid_argument("uniform noise needs a <= b");
  const int m = b - a + 1;
  return NoiseSpec(Pmf(a, std::vector<double>(m, 1.0 / m)));
}

bool NoiseSpec::IsUniform() const {
  const auto& probs = pmf_.probs();
  return std::all_of(probs.begin(), probs.end(),
                     [&](double v) { return v == probs.front(); });
}

MixingMatrix::MixingMatrix(std::vector<IntRange> col_classes,
                           std::vector<int> row_values,
                           std::vector<double> entries, bool has_tail)
    : col_classes_(std::move(col_classes)),
      row_values_(std::move(row_values)),
      entries_(std::move(entries)),
      has_tail_(has_tail) {
  if (col_classes_.empty() || row_values_.empty()) {
    throw std::invalid_argument("mixing matrix must be non-empty");
  }
  if (entries_.size() != static_cast<size_t>(rows()) * cols()) {
    throw std::invalid_argument("mixing matrix entry count mismatch");
  }
}

std::vector<double> MixingMatrix::Apply(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != cols()) {
    throw std::invalid_argument("dimension mismatch: p has " +
                                std::to_string(p.size()) + " entries, M has " +
                                std::to_string(cols()) + " columns");
  }
  std::vector<double> r(rows(), 0.0);
  for (int k = 0; k < rows(); ++k) {
    double acc = 0.0;
    for (int i = 0; i < cols(); ++i) acc += (*this)(k, i) * p[i];
    r[k] = acc;
  }
  return r;
}

std::vector<double> MixingMatrix::ColumnSums() const {
  std::vector<double> sums(cols(), 0.0);
  for (int k = 0; k < rows(); ++k) {
    for (int i = 0; i < cols(); ++i) sums[i] += (*this)(k, i);
  }
  return sums;
}

MixingMatrix MixingMatrix::WithMergedColumns(int col) const {
  if (cols() < 2) throw std::invalid_argument("cannot merge a single class");
  if (col < 0 || col >= cols() - 1) {
    throw std::invalid_argument("merge index out of range");
  }
  std::vector<IntRange> classes;
  classes.reserve(cols() - 1);
  for (int i = 0; i < cols(); ++i) {
    if (i == col + 1) continue;
    classes.push_back(i == col ? IntRange{col_classes_[col].min,
                                          col_classes_[col + 1].max}
                               : col_classes_[i]);
  }
  // Mass of a merged class is spread evenly over its values, so the new
  // column is the size-weighted average of the two old ones.
  const double wa = col_classes_[col].size();
  const double wb = col_classes_[col + 1].size();
  std::vector<double> entries;
  entries.reserve(static_cast<size_t>(rows()) * (cols() - 1));
  for (int k = 0; k < rows(); ++k) {
    for (int i = 0; i < cols(); ++i) {
      if (i == col + 1) continue;
      entries.push_back(i == col ? (wa * (*this)(k, col) +
                                    wb * (*this)(k, col + 1)) / (wa + wb)
                                 : (*this)(k, i));
    }
  }
  return MixingMatrix(std::move(classes), row_values_, std::move(entries),
                      has_tail_);
}

Pmf PmfFromHistogram(const Histogram& h) {
  if (h.total() < 1) throw std::invalid_argument("empty data");
  std::vector<double> probs(h.size());
  const double total = static_cast<double>(h.total());
  for (int i = 0; i < h.size(); ++i) probs[i] = h.counts()[i] / total;
  return Pmf(h.support_min(), std::move(probs));
}

Pmf Convolve(const Pmf& p, const Pmf& q) {
  const auto& a = p.probs();
  const auto& b = q.probs();
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return Pmf(p.support_min() + q.support_min(), std::move(out));
}

MixingMatrix BuildMixingMatrix(IntRange x_support,
                               const ObfuscationScheme& scheme) {
  if (x_support.size() < 1) {
    throw std::invalid_argument("x_support must be non-empty");
  }
  const Pmf& q = scheme.noise.pmf();
  const int z_min = x_support.min + q.support_min();
  const int z_max = x_support.max + q.support_max();
  int last_plain = z_max;
  if (scheme.truncation_at) {
    const int t = *scheme.truncation_at;
    if (t <= z_min || t > z_max) {
      throw std::invalid_argument(
          "truncation threshold " + std::to_string(t) +
          " outside the masked support (" + std::to_string(z_min) + ", " +
          std::to_string(z_max) + "]");
    }
    last_plain = t - 1;
  }
  const int n_cols = x_support.size();
  const int n_plain = last_plain - z_min + 1;
  const int n_rows = n_plain + (scheme.truncation_at ? 1 : 0);

  std::vector<double> entries(static_cast<size_t>(n_rows) * n_cols, 0.0);
  std::vector<int> row_values(n_rows);
  for (int k = 0; k < n_plain; ++k) row_values[k] = z_min + k;
  if (scheme.truncation_at) row_values.back() = *scheme.truncation_at;

  for (int i = 0; i < n_cols; ++i) {
    const int x = x_support.min + i;
    for (int j = 0; j < q.size(); ++j) {
      const int z = x + q.support_min() + j;
      const int row = std::min(z, last_plain + 1) - z_min;
      entries[static_cast<size_t>(row) * n_cols + i] += q.probs()[j];
    }
  }
  std::vector<IntRange> classes(n_cols);
  for (int i = 0; i < n_cols; ++i) {
    classes[i] = {x_support.min + i, x_support.min + i};
  }
  return MixingMatrix(std::move(classes), std::move(row_values),
                      std::move(entries), scheme.truncation_at.has_value());
}

std::vector<double> Cdf(std::span<const double> probs) {
  std::vector<double> out(probs.size());
  std::partial_sum(probs.begin(), probs.end(), out.begin());
  return out;
}

std::vector<double> Cdf(const Pmf& p) { return Cdf(std::span(p.probs())); }

}  // namespace obfus
