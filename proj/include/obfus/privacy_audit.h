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
// Disclosure-risk audit by counting noise assignments.
//
// A matrix A with one row per true class and one column per noise value
// records how many individuals of class i received noise j. Publishing the
// masked histogram fixes every anti-diagonal sum (cells with constant
// i + j). Treating all non-negative matrices with those anti-diagonal sums
// as equally likely, the chance that the row sums equal a given true
// histogram is
//
//   #{A : anti-diagonals = z, rows = x} / #{A : anti-diagonals = z}.

#ifndef OBFUS_PRIVACY_AUDIT_H_
#define OBFUS_PRIVACY_AUDIT_H_

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <vector>

namespace obfus {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

struct AuditInstance {
  // Individuals per true class (row sums).
  std::vector<int64_t> x_counts;
  // Individuals per masked value (anti-diagonal sums), size rows + m - 1.
  std::vector<int64_t> z_counts;
  int noise_size = 1;

  // Throws std::invalid_argument on inconsistent totals or shapes.
  void Validate() const;

  // Row and anti-diagonal sums of an explicit assignment matrix.
  static AuditInstance FromAssignment(
      const std::vector<std::vector<int64_t>>& matrix);
};

inline constexpr int64_t kDefaultAuditStateCap = 2'000'000;

// Number of matrices with the instance's anti-diagonal sums and, when
// fix_rows, its row sums. Exact. Throws std::runtime_error when a DP layer
// would exceed state_cap distinct row-remainder states.
BigInt CountMatrices(const AuditInstance& instance, bool fix_rows,
                     int64_t state_cap = kDefaultAuditStateCap);

struct AuditProbability {
  BigInt consistent_with_rows;
  BigInt consistent;
  BigRational exact;
  double value = 0.0;
  double log10_value = 0.0;
};

AuditProbability ConditionalProbability(
    const AuditInstance& instance, int64_t state_cap = kDefaultAuditStateCap);

struct MonteCarloAuditResult {
  double estimate = 0.0;
  // NaN with a single sample.
  double std_error = 0.0;
  bool std_error_defined = false;
  int64_t samples = 0;
};

// Sequential importance sampling over matrices that satisfy both margins,
// each weighted by the inverse of its proposal probability; the mean weight
// estimates the numerator count without bias.
MonteCarloAuditResult MonteCarloAudit(const AuditInstance& instance,
                                      int64_t samples, uint64_t seed);

// log10 of a positive integer of any size.
double Log10(const BigInt& value);

}  // namespace obfus

#endif  // OBFUS_PRIVACY_AUDIT_H_
