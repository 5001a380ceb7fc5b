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
// File formats used by the command-line tool.
//
//   histogram CSV   header "value,count", one row per support value in
//                   ascending order, zero counts written out.
//   grouped CSV     header "range_start,range_end,count"; range_end is an
//                   integer or the word "open" for the unbounded top class.
//   JSON documents  every document carries a "schema" tag; see
//                   docs/schemas.md.

#ifndef OBFUS_IO_H_
#define OBFUS_IO_H_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "obfus/assess.h"
#include "obfus/core_model.h"
#include "obfus/estimators.h"
#include "obfus/obfuscate.h"
#include "obfus/preprocess.h"
#include "obfus/privacy_audit.h"

namespace obfus {

using Json = nlohmann::json;

inline constexpr std::string_view kPublishedSchema = "obfus.published/1";
inline constexpr std::string_view kEstimateSchema = "obfus.estimate/1";
inline constexpr std::string_view kQuantilesSchema = "obfus.quantiles/1";
inline constexpr std::string_view kMaxSchema = "obfus.max/1";
inline constexpr std::string_view kLlnMaxSchema = "obfus.lln_max/1";
inline constexpr std::string_view kAuditSchema = "obfus.audit/1";
inline constexpr std::string_view kBootstrapSchema = "obfus.bootstrap/1";

Histogram ParseHistogramCsv(std::istream& in);
void WriteHistogramCsv(std::ostream& out, const Histogram& h);
std::vector<GroupedClass> ParseGroupedCsv(std::istream& in);

Histogram ReadHistogramFile(const std::string& path);
void WriteHistogramFile(const std::string& path, const Histogram& h);
Json ReadJsonFile(const std::string& path);
void WriteJsonFile(const std::string& path, const Json& doc);

// The metadata half of a published bundle; the masked histogram travels in
// its own CSV file.
Json PublishedMetadataToJson(const PublishedDataset& data);
PublishedDataset PublishedFromJson(const Json& metadata, Histogram masked);

Json EstimateReportToJson(const EstimateReport& report);
EstimateReport EstimateReportFromJson(const Json& doc);
// PMF on the report's support; requires a non-negative estimate with
// contiguous single-value classes.
Pmf EstimatePmf(const EstimateReport& report);

Json BootstrapReportToJson(const BootstrapReport& report, Method method,
                           int64_t n, int B, uint64_t seed);
Json AuditReportToJson(const AuditInstance& instance,
                       const AuditProbability& exact);

// Checks the schema tag and the presence and type of every documented field.
// Throws std::invalid_argument naming the first violation.
void ValidateDocument(const Json& doc);

}  // namespace obfus

#endif  // OBFUS_IO_H_
