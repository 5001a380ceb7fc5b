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
#include "obfus/likelihood.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace obfus {
namespace {

void ValidateSimplexPoint(const LikelihoodModel& model,
                          std::span<const double> p) {
  if (static_cast<int>(p.size()) != model.x_len()) {
    throw std::invalid_argument("dimension mismatch: p has " +
                                std::to_string(p.size()) +
                                " entries, model has " +
                                std::to_string(model.x_len()) + " classes");
  }
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::invalid_argument("p must be >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kPmfSumTolerance) {
    throw std::invalid_argument("p must sum to 1");
  }
}

// log(1 + exp(x)) without overflow.
double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// L_k = log(sum_{i >= k} exp(-u_i)) for every k.
std::vector<double> SuffixLogSumExp(std::span<const double> u) {
  std::vector<double> out(u.size());
  double acc = -std::numeric_limits<double>::infinity();
  for (size_t k = u.size(); k-- > 0;) {
    const double a = -u[k];
    const double hi = std::max(acc, a);
    acc = hi + std::log(std::exp(acc - hi) + std::exp(a - hi));
    out[k] = acc;
  }
  return out;
}

}  // namespace

LikelihoodModel::LikelihoodModel(MixingMatrix m, std::vector<int64_t> counts,
                                 NoiseSpec noise_spec, std::optional<int> t)
    : mixing(std::move(m)),
      obs(std::move(counts)),
      noise(std::move(noise_spec)),
      truncation_at(t) {
  if (static_cast<int>(obs.size()) != mixing.rows()) {
    throw std::invalid_argument("observation count does not match the "
                                "mixing matrix rows");
  }
  for (int64_t c : obs) {
    if (c < 0) throw std::invalid_argument("observed counts must be >= 0");
  }
  if (total() < 1) throw std::invalid_argument("empty data");
}

int64_t LikelihoodModel::total() const {
  return std::accumulate(obs.begin(), obs.end(), int64_t{0});
}

LikelihoodModel BuildLikelihoodModel(const PublishedDataset& data) {
  ObfuscationScheme scheme{data.noise, data.truncation_at, std::nullopt};
  MixingMatrix m = BuildMixingMatrix(data.declared_support, scheme);
  const auto& rows = m.row_values();
  std::vector<int64_t> obs(rows.size(), 0);
  const Histogram& h = data.masked;
  for (int v = h.support_min(); v <= h.support_max(); ++v) {
    const int64_t c = h.CountAt(v);
    if (c == 0) continue;
    int row = v - rows.front();
    if (m.has_tail() && v >= rows.back()) row = m.rows() - 1;
    if (row < 0 || row >= m.rows()) {
      throw std::invalid_argument(
          "masked value " + std::to_string(v) +
          " is unreachable from the declared support");
    }
    obs[row] += c;
  }
  return LikelihoodModel(std::move(m), std::move(obs), data.noise,
                         data.truncation_at);
}

double Loglik(const LikelihoodModel& model, std::span<const double> p) {
  ValidateSimplexPoint(model, p);
  const std::vector<double> r = model.mixing.Apply(p);
  double sum = 0.0;
  for (int k = 0; k < model.mixing.rows(); ++k) {
    if (model.obs[k] == 0) continue;
    if (!(r[k] > 0.0)) return kNegInf;
    sum += static_cast<double>(model.obs[k]) * std::log(r[k]);
  }
  return sum;
}

LoglikEvaluator::LoglikEvaluator(const LikelihoodModel& model,
                                 std::span<const double> p)
    : model_(model), p_(p.begin(), p.end()) {
  ValidateSimplexPoint(model, p);
  const MixingMatrix& m = model.mixing;
  r_ = m.Apply(p_);
  terms_.resize(m.rows());
  for (int k = 0; k < m.rows(); ++k) {
    terms_[k] = Term(k, r_[k]);
    if (std::isinf(terms_[k])) {
      ++infinite_rows_;
    } else {
      finite_sum_ += terms_[k];
    }
  }
  touched_.resize(std::max(0, m.cols() - 1));
  for (int i = 0; i + 1 < m.cols(); ++i) {
    for (int k = 0; k < m.rows(); ++k) {
      if (m(k, i) != 0.0 || m(k, i + 1) != 0.0) touched_[i].push_back(k);
    }
  }
}

double LoglikEvaluator::Term(int k, double r) const {
  const int64_t n = model_.obs[k];
  if (n == 0) return 0.0;
  if (!(r > 0.0)) return kNegInf;
  return static_cast<double>(n) * std::log(r);
}

double LoglikEvaluator::value() const {
  return infinite_rows_ > 0 ? kNegInf : finite_sum_;
}

double LoglikEvaluator::Delta(int i, double new_pi, double new_pi1) const {
  if (i < 0 || i + 1 >= static_cast<int>(p_.size())) {
    throw std::invalid_argument("pair index out of range");
  }
  const MixingMatrix& m = model_.mixing;
  const double d0 = new_pi - p_[i];
  const double d1 = new_pi1 - p_[i + 1];
  double sum = finite_sum_;
  int infinite = infinite_rows_;
  for (int k : touched_[i]) {
    const double r = r_[k] + m(k, i) * d0 + m(k, i + 1) * d1;
    const double old_term = terms_[k];
    const double new_term = Term(k, r);
    if (std::isinf(old_term)) {
      --infinite;
    } else {
      sum -= old_term;
    }
    if (std::isinf(new_term)) {
      ++infinite;
    } else {
      sum += new_term;
    }
  }
  return infinite > 0 ? kNegInf : sum;
}

void LoglikEvaluator::Apply(int i, double new_pi, double new_pi1) {
  if (i < 0 || i + 1 >= static_cast<int>(p_.size())) {
    throw std::invalid_argument("pair index out of range");
  }
  p_[i] = new_pi;
  p_[i + 1] = new_pi1;
  for (int k : touched_[i]) RefreshRow(k);
}

void LoglikEvaluator::ApplyPair(int i, int j, double new_pi, double new_pj) {
  const int n = static_cast<int>(p_.size());
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
    throw std::invalid_argument("pair index out of range");
  }
  const MixingMatrix& m = model_.mixing;
  p_[i] = new_pi;
  p_[j] = new_pj;
  for (int k = 0; k < m.rows(); ++k) {
    if (m(k, i) != 0.0 || m(k, j) != 0.0) RefreshRow(k);
  }
}

void LoglikEvaluator::RefreshRow(int k) {
  // Recomputed from scratch so rounding does not accumulate in r.
  const MixingMatrix& m = model_.mixing;
  double acc = 0.0;
  for (int c = 0; c < m.cols(); ++c) acc += m(k, c) * p_[c];
  r_[k] = acc;
  const double term = Term(k, acc);
  if (std::isinf(terms_[k])) {
    --infinite_rows_;
  } else {
    finite_sum_ -= terms_[k];
  }
  if (std::isinf(term)) {
    ++infinite_rows_;
  } else {
    finite_sum_ += term;
  }
  terms_[k] = term;
}

double LoglikDelta(const LikelihoodModel& model, std::span<const double> p,
                   int i, double new_pi, double new_pi1) {
  if (i < 0 || i + 1 >= static_cast<int>(p.size())) {
    throw std::invalid_argument("pair index out of range");
  }
  const double before = p[i] + p[i + 1];
  if (std::abs(before - (new_pi + new_pi1)) > 1e-12 * std::max(1.0, before)) {
    throw std::invalid_argument("pair move must conserve mass");
  }
  if (new_pi < 0.0 || new_pi1 < 0.0) {
    throw std::invalid_argument("p must be >= 0");
  }
  LoglikEvaluator eval(model, p);
  return eval.Delta(i, new_pi, new_pi1);
}

std::vector<double> NestedLogistic(std::span<const double> u) {
  const std::vector<double> lse = SuffixLogSumExp(u);
  std::vector<double> r(u.size());
  // r = 1 / (1 + e^L) = e^{-softplus(L)}
  for (size_t k = 0; k < u.size(); ++k) r[k] = std::exp(-Softplus(lse[k]));
  return r;
}

std::vector<double> NestedLogisticInverse(std::span<const double> r) {
  std::vector<double> u(r.size());
  double next_s = 0.0;
  for (size_t k = r.size(); k-- > 0;) {
    if (!(r[k] > 0.0 && r[k] < 1.0)) {
      throw std::invalid_argument("r must lie in (0, 1)");
    }
    const double s = 1.0 / r[k] - 1.0;
    if (!(s > next_s)) {
      throw std::invalid_argument("r must be strictly increasing");
    }
    u[k] = -std::log(s - next_s);
    next_s = s;
  }
  return u;
}

double NestedLogisticLoglik(const NestedLogisticModel& model,
                            std::span<const double> u) {
  if (model.counts.size() != u.size() + 1) {
    throw std::invalid_argument("nested logistic model needs n + 1 counts");
  }
  const std::vector<double> r = NestedLogistic(u);
  const double rest = 1.0 - std::accumulate(r.begin(), r.end(), 0.0);
  double l = 0.0;
  if (model.counts[0] > 0) {
    if (!(rest > 0.0)) return kNegInf;
    l += static_cast<double>(model.counts[0]) * std::log(rest);
  }
  for (size_t j = 0; j < r.size(); ++j) {
    const int64_t n = model.counts[j + 1];
    if (n > 0) l += static_cast<double>(n) * std::log(r[j]);
  }
  return l;
}

std::vector<double> NestedLogisticLoglikGrad(const NestedLogisticModel& model,
                                             std::span<const double> u) {
  if (model.counts.size() != u.size() + 1) {
    throw std::invalid_argument("nested logistic model needs n + 1 counts");
  }
  const size_t n = u.size();
  const std::vector<double> lse = SuffixLogSumExp(u);
  // log(1 + S_j)
  std::vector<double> log1p_s(n);
  double sum_r = 0.0;
  for (size_t j = 0; j < n; ++j) {
    log1p_s[j] = Softplus(lse[j]);
    sum_r += std::exp(-log1p_s[j]);
  }
  const double denom = 1.0 - sum_r;
  const double n0 = static_cast<double>(model.counts[0]);

  std::vector<double> grad(n);
  double sq_prefix = 0.0;    // sum_{j<=k} 1 / (1 + S_j)^2
  double count_prefix = 0.0; // sum_{j<=k} n_j / (1 + S_j)
  for (size_t k = 0; k < n; ++k) {
    sq_prefix += std::exp(-2.0 * log1p_s[k]);
    count_prefix +=
        static_cast<double>(model.counts[k + 1]) * std::exp(-log1p_s[k]);
    const double e = std::exp(-u[k]);
    grad[k] = (n0 > 0.0 ? -n0 * e * sq_prefix / denom : 0.0) +
              e * count_prefix;
  }
  return grad;
}

}  // namespace obfus
