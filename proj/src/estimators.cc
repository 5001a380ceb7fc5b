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

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace obfus {
namespace {

constexpr std::array<std::pair<Method, std::string_view>, 7> kMethodNames = {{
    {Method::kLeastSquares, "ls"},
    {Method::kLeastSquaresQr, "ls-qr"},
    {Method::kMleForward, "mle-fwd"},
    {Method::kMleBackward, "mle-bwd"},
    {Method::kMleCombined, "mle-combined"},
    {Method::kCoordinate, "coord"},
    {Method::kEmpirical, "empirical"},
}};

std::vector<int> NegativeComponents(std::span<const double> p) {
  std::vector<int> out;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<IntRange> SingletonClasses(int x_len) {
  std::vector<IntRange> out(x_len);
  for (int i = 0; i < x_len; ++i) out[i] = {i, i};
  return out;
}

double LoglikIfFeasible(const LikelihoodModel& model,
                        std::span<const double> p) {
  if (std::any_of(p.begin(), p.end(), [](double v) { return v < 0.0; })) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(sum - 1.0) > kPmfSumTolerance) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return Loglik(model, p);
}

std::vector<double> EmpiricalFrequencies(std::span<const int64_t> obs) {
  const int64_t total = std::accumulate(obs.begin(), obs.end(), int64_t{0});
  if (total < 1) throw std::invalid_argument("empty data");
  std::vector<double> r(obs.size());
  for (size_t k = 0; k < obs.size(); ++k) {
    r[k] = static_cast<double>(obs[k]) / static_cast<double>(total);
  }
  return r;
}

void CheckDifferenceInputs(std::span<const int64_t> obs, int m, int x_len) {
  if (m < 1 || x_len < 1) {
    throw std::invalid_argument("noise size and class count must be >= 1");
  }
  if (static_cast<int>(obs.size()) != x_len + m - 1) {
    throw std::invalid_argument(
        "expected " + std::to_string(x_len + m - 1) +
        " masked classes for untruncated data, got " +
        std::to_string(obs.size()));
  }
}

void AddWindowWarning(EstimateReport& report, int m, int x_len) {
  if (x_len - 2 > m - 1) {
    report.warnings.push_back(
        "components beyond the first " + std::to_string(m) +
        " differences overlap the noise window and estimate p_j - p_{j-" +
        std::to_string(m) + "}, not p_j");
  }
}

std::vector<double> ForwardDifferences(std::span<const double> r, int m,
                                       int x_len) {
  std::vector<double> p(x_len, 0.0);
  if (x_len == 1) {
    p[0] = 1.0;
    return p;
  }
  p[0] = m * r[0];
  for (int j = 1; j <= x_len - 2; ++j) p[j] = m * (r[j] - r[j - 1]);
  p[x_len - 1] = 1.0 - std::accumulate(p.begin(), p.end() - 1, 0.0);
  return p;
}

}  // namespace

std::string_view MethodName(Method method) {
  for (const auto& [m, name] : kMethodNames) {
    if (m == method) return name;
  }
  return "unknown";
}

std::optional<Method> ParseMethod(std::string_view name) {
  for (const auto& [m, n] : kMethodNames) {
    if (n == name) return m;
  }
  return std::nullopt;
}

EstimateReport LsConstrained(const LikelihoodModel& model, bool use_qr) {
  const MixingMatrix& mix = model.mixing;
  const int rows = mix.rows();
  const int cols = mix.cols();
  Eigen::MatrixXd x(rows, cols);
  for (int k = 0; k < rows; ++k) {
    for (int i = 0; i < cols; ++i) x(k, i) = mix(k, i);
  }
  const std::vector<double> freq = EmpiricalFrequencies(model.obs);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(freq.data(),
                                                              rows);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_check(x);
  if (rank_check.rank() < cols) {
    std::string names;
    const auto& perm = rank_check.colsPermutation().indices();
    for (int c = static_cast<int>(rank_check.rank()); c < cols; ++c) {
      const IntRange cls = mix.col_classes()[perm[c]];
      if (!names.empty()) names += ", ";
      names += std::to_string(cls.min);
      if (cls.max != cls.min) names += ".." + std::to_string(cls.max);
    }
    throw std::invalid_argument(
        "design matrix is rank deficient (rank " +
        std::to_string(rank_check.rank()) + " of " + std::to_string(cols) +
        "); dependent columns for X = " + names);
  }

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(cols);
  Eigen::VectorXd unconstrained;  // (X'X)^{-1} X'Y
  Eigen::VectorXd gram_inv_ones;  // (X'X)^{-1} 1
  if (use_qr) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    const Eigen::MatrixXd r_full = qr.matrixQR().topRows(cols);
    const auto r = r_full.triangularView<Eigen::Upper>();
    const Eigen::VectorXd qty =
        (qr.householderQ().transpose() * y).head(cols);
    unconstrained = r.solve(qty);
    gram_inv_ones = r.solve(r.transpose().solve(ones));
  } else {
    const Eigen::MatrixXd gram = x.transpose() * x;
    const Eigen::MatrixXd gram_inv = gram.inverse();
    unconstrained = gram_inv * (x.transpose() * y);
    gram_inv_ones = gram_inv * ones;
  }
  const double lambda =
      (ones.dot(unconstrained) - 1.0) / ones.dot(gram_inv_ones);
  const Eigen::VectorXd beta = unconstrained - lambda * gram_inv_ones;

  EstimateReport report;
  report.method = use_qr ? Method::kLeastSquaresQr : Method::kLeastSquares;
  report.p_hat.assign(beta.data(), beta.data() + cols);
  report.classes = mix.col_classes();
  report.negative_components = NegativeComponents(report.p_hat);
  report.final_loglik = LoglikIfFeasible(model, report.p_hat);
  return report;
}

EstimateReport MleForward(std::span<const int64_t> obs, int m, int x_len) {
  CheckDifferenceInputs(obs, m, x_len);
  EstimateReport report;
  report.method = Method::kMleForward;
  report.p_hat = ForwardDifferences(EmpiricalFrequencies(obs), m, x_len);
  report.classes = SingletonClasses(x_len);
  report.negative_components = NegativeComponents(report.p_hat);
  AddWindowWarning(report, m, x_len);
  return report;
}

EstimateReport MleBackward(std::span<const int64_t> obs, int m, int x_len) {
  CheckDifferenceInputs(obs, m, x_len);
  // Reading the masked histogram from the top turns the backward estimator
  // into the forward one.
  std::vector<double> r = EmpiricalFrequencies(obs);
  std::reverse(r.begin(), r.end());
  std::vector<double> p = ForwardDifferences(r, m, x_len);
  std::reverse(p.begin(), p.end());

  EstimateReport report;
  report.method = Method::kMleBackward;
  report.p_hat = std::move(p);
  report.classes = SingletonClasses(x_len);
  report.negative_components = NegativeComponents(report.p_hat);
  AddWindowWarning(report, m, x_len);
  return report;
}

EstimateReport MleCombined(std::span<const int64_t> obs, int m, int x_len) {
  const EstimateReport fwd = MleForward(obs, m, x_len);
  const EstimateReport bwd = MleBackward(obs, m, x_len);

  std::vector<double> p(x_len);
  for (int j = 0; j < x_len; ++j) {
    // Plateaus count as increasing.
    const bool increasing = j == 0 || obs[j] >= obs[j - 1];
    p[j] = increasing ? fwd.p_hat[j] : bwd.p_hat[j];
  }
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(sum > 0.0)) {
    throw std::runtime_error("combined estimate has non-positive total mass");
  }
  for (double& v : p) v /= sum;

  EstimateReport report;
  report.method = Method::kMleCombined;
  report.p_hat = std::move(p);
  report.classes = SingletonClasses(x_len);
  report.negative_components = NegativeComponents(report.p_hat);
  report.warnings = fwd.warnings;

  // The rule assumes the masked histogram rises and then falls.
  bool seen_fall = false;
  for (size_t k = 1; k < obs.size(); ++k) {
    if (obs[k] < obs[k - 1]) {
      seen_fall = true;
    } else if (obs[k] > obs[k - 1] && seen_fall) {
      report.warnings.push_back(
          "masked histogram is not unimodal (rises again at masked index " +
          std::to_string(k) + "); the combination rule does not apply");
      break;
    }
  }
  return report;
}

EstimateReport CoordinateMle(const LikelihoodModel& model,
                             const CoordinateMleOptions& options) {
  const int n = model.x_len();
  const int grid = options.grid;
  if (grid < 2) throw std::invalid_argument("grid must be >= 2");
  if (options.max_epochs < 1) {
    throw std::invalid_argument("max_epochs must be >= 1");
  }
  if (options.refine_levels < 0) {
    throw std::invalid_argument("refine_levels must be >= 0");
  }
  std::vector<double> start = options.init;
  if (start.empty()) start.assign(n, 1.0 / n);

  LoglikEvaluator eval(model, start);
  if (eval.value() == kNegInf) throw std::runtime_error("infeasible start");

  const MixingMatrix& mix = model.mixing;
  // Only rows whose weights on the two columns differ change when mass moves
  // inside the pair; the rest hold r constant.
  struct PairRows {
    int i = 0, j = 0;
    std::vector<int> rows;
    std::vector<double> obs, a, b;
  };
  std::vector<PairRows> pairs;
  for (int i = 0; i + 1 < n; ++i) {
    const int j_end =
        options.schedule == PairSchedule::kAdjacent ? i + 2 : n;
    for (int j = i + 1; j < j_end; ++j) {
      PairRows pr;
      pr.i = i;
      pr.j = j;
      for (int k = 0; k < mix.rows(); ++k) {
        if (model.obs[k] == 0 || mix(k, i) == mix(k, j)) continue;
        pr.rows.push_back(k);
        pr.obs.push_back(static_cast<double>(model.obs[k]));
        pr.a.push_back(mix(k, i));
        pr.b.push_back(mix(k, j));
      }
      pairs.push_back(std::move(pr));
    }
  }

  EstimateReport report;
  report.method = Method::kCoordinate;
  report.classes = mix.col_classes();
  if (options.record_trace) report.trace.push_back(Loglik(model, eval.p()));

  std::vector<double> base;
  bool converged = true;
  int epochs = 0;
  double scale = 1.0;  // grid spacing is s * scale / G
  for (int level = 0; level <= options.refine_levels; ++level) {
    bool level_converged = false;
    for (int epoch = 0; epoch < options.max_epochs && !level_converged;
         ++epoch) {
      ++epochs;
      double gain = 0.0;
      for (const PairRows& pr : pairs) {
        const std::vector<double>& p = eval.p();
        const int i = pr.i, j = pr.j;
        const double s = p[i] + p[j];
        if (s <= 0.0 || pr.rows.empty()) continue;

        base.resize(pr.rows.size());
        for (size_t t = 0; t < pr.rows.size(); ++t) {
          const int k = pr.rows[t];
          double acc = 0.0;
          for (int c = 0; c < n; ++c) {
            if (c != i && c != j) acc += mix(k, c) * p[c];
          }
          base[t] = acc;
        }
        auto score = [&](double x, double y) {
          double v = 0.0;
          for (size_t t = 0; t < pr.rows.size(); ++t) {
            const double r = base[t] + pr.a[t] * x + pr.b[t] * y;
            if (!(r > 0.0)) return kNegInf;
            v += pr.obs[t] * std::log(r);
          }
          return v;
        };

        const double current = score(p[i], p[j]);
        double best = current;
        double best_x = -1.0;
        if (level == 0) {
          for (int g = 0; g <= grid; ++g) {
            const double x = s * (static_cast<double>(g) / grid);
            const double v = score(x, s - x);
            if (v > best) {
              best = v;
              best_x = x;
            }
          }
        } else {
          const double step = s * scale / grid;
          for (int g = -grid / 2; g <= grid / 2; ++g) {
            const double x = p[i] + g * step;
            if (x < 0.0 || x > s) continue;
            const double v = score(x, s - x);
            if (v > best) {
              best = v;
              best_x = x;
            }
          }
        }
        if (best_x < 0.0) continue;
        eval.ApplyPair(i, j, best_x, s - best_x);
        gain += best - current;
        if (options.record_trace) {
          report.trace.push_back(Loglik(model, eval.p()));
        }
        if (options.observer) options.observer(epochs, i, eval.p());
      }
      level_converged = gain < options.tol;
    }
    converged = converged && level_converged;
    scale /= 10.0;
  }

  report.p_hat = eval.p();
  report.iterations = epochs;
  report.final_loglik = Loglik(model, report.p_hat);
  if (!converged) {
    report.warnings.push_back("stopped at max_epochs = " +
                              std::to_string(options.max_epochs) +
                              " before the per-epoch gain fell below tol");
  }
  return report;
}

LikelihoodModel MergeClasses(const LikelihoodModel& model, int i) {
  if (model.x_len() < 2) {
    throw std::invalid_argument("cannot merge a single-class model");
  }
  if (i < 0 || i >= model.x_len() - 1) {
    throw std::invalid_argument("merge index out of range");
  }
  return LikelihoodModel(model.mixing.WithMergedColumns(i), model.obs,
                         model.noise, model.truncation_at);
}

LikelihoodModel MergeMaskedValues(const LikelihoodModel& model, int k) {
  const MixingMatrix& m = model.mixing;
  if (m.rows() < 2) {
    throw std::invalid_argument("cannot merge a single masked row");
  }
  if (k < 0 || k >= m.rows() - 1) {
    throw std::invalid_argument("masked row index out of range");
  }
  std::vector<double> entries;
  entries.reserve(static_cast<size_t>(m.rows() - 1) * m.cols());
  std::vector<int> row_values;
  std::vector<int64_t> obs;
  for (int r = 0; r < m.rows(); ++r) {
    if (r == k + 1) continue;
    row_values.push_back(m.row_values()[r]);
    obs.push_back(model.obs[r] + (r == k ? model.obs[k + 1] : 0));
    for (int c = 0; c < m.cols(); ++c) {
      entries.push_back(m(r, c) + (r == k ? m(k + 1, c) : 0.0));
    }
  }
  return LikelihoodModel(
      MixingMatrix(m.col_classes(), std::move(row_values), std::move(entries),
                   m.has_tail()),
      std::move(obs), model.noise, model.truncation_at);
}

LikelihoodModel MergeEmptyMaskedValues(const LikelihoodModel& model) {
  LikelihoodModel out = model;
  auto positive = [](int64_t c) { return c > 0; };
  int k = static_cast<int>(
      std::find_if(out.obs.begin(), out.obs.end(), positive) -
      out.obs.begin());
  int last = static_cast<int>(
      out.obs.rend() - std::find_if(out.obs.rbegin(), out.obs.rend(),
                                    positive)) - 1;
  while (k < last) {
    if (out.obs[k] == 0) {
      out = MergeMaskedValues(out, k);
      --last;
    } else {
      ++k;
    }
  }
  return out;
}

std::vector<double> AggregateToClasses(std::span<const double> per_value,
                                       int support_min,
                                       std::span<const IntRange> classes) {
  std::vector<double> out(classes.size(), 0.0);
  for (size_t c = 0; c < classes.size(); ++c) {
    for (int v = classes[c].min; v <= classes[c].max; ++v) {
      const int idx = v - support_min;
      if (idx >= 0 && idx < static_cast<int>(per_value.size())) {
        out[c] += per_value[idx];
      }
    }
  }
  return out;
}

EstimateReport Estimate(const LikelihoodModel& model, Method method,
                        const EstimateOptions& options) {
  const bool merged = std::any_of(
      model.mixing.col_classes().begin(), model.mixing.col_classes().end(),
      [](const IntRange& c) { return c.size() != 1; });
  auto require_plain = [&](std::string_view what) {
    if (model.truncation_at) {
      throw std::invalid_argument(std::string(what) +
                                  " needs untruncated masked data");
    }
    if (merged || model.mixing.rows() !=
                      model.x_len() + model.noise.size() - 1) {
      throw std::invalid_argument(std::string(what) +
                                  " needs a model without merged classes");
    }
  };

  EstimateReport report;
  switch (method) {
    case Method::kLeastSquares:
    case Method::kLeastSquaresQr:
      return LsConstrained(model, method == Method::kLeastSquaresQr);
    case Method::kMleForward:
    case Method::kMleBackward:
    case Method::kMleCombined: {
      require_plain("difference estimator");
      if (!model.noise.IsUniform()) {
        throw std::invalid_argument(
            "difference estimators need uniform noise");
      }
      const int m = model.noise.size();
      const int x_len = model.x_len();
      if (method == Method::kMleForward) {
        report = MleForward(model.obs, m, x_len);
      } else if (method == Method::kMleBackward) {
        report = MleBackward(model.obs, m, x_len);
      } else {
        report = MleCombined(model.obs, m, x_len);
      }
      report.classes = model.mixing.col_classes();
      report.final_loglik = LoglikIfFeasible(model, report.p_hat);
      return report;
    }
    case Method::kCoordinate:
      return CoordinateMle(model, options.coordinate);
    case Method::kEmpirical: {
      require_plain("empirical estimator");
      if (model.noise.size() != 1) {
        throw std::invalid_argument("empirical estimator needs point-mass "
                                    "noise");
      }
      report.method = Method::kEmpirical;
      report.p_hat = EmpiricalFrequencies(model.obs);
      report.classes = model.mixing.col_classes();
      report.final_loglik = Loglik(model, report.p_hat);
      return report;
    }
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace obfus
