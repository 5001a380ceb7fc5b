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
#include "obfus/io.h"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace obfus {
namespace {

std::string Trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(Trim(field));
  return fields;
}

int64_t ParseInt(const std::string& text, std::string_view what) {
  size_t used = 0;
  int64_t v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw std::invalid_argument("bad " + std::string(what) + ": '" + text +
                                "'");
  }
  return v;
}

// Reads non-empty lines after checking the header.
std::vector<std::vector<std::string>> ReadCsv(std::istream& in,
                                              std::string_view header) {
  std::string line;
  if (!std::getline(in, line) || Trim(line) != header) {
    throw std::invalid_argument("expected CSV header '" +
                                std::string(header) + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    rows.push_back(SplitCsvLine(line));
  }
  return rows;
}

Json NumberOrNull(double v) {
  return std::isfinite(v) ? Json(v) : Json(nullptr);
}

void Require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void RequireField(const Json& doc, const char* key, bool ok) {
  Require(doc.contains(key), std::string("missing field '") + key + "'");
  Require(ok, std::string("field '") + key + "' has the wrong type");
}

bool IsNumberArray(const Json& v) {
  if (!v.is_array()) return false;
  for (const auto& e : v) {
    if (!e.is_number()) return false;
  }
  return true;
}

bool IsIntArray(const Json& v) {
  if (!v.is_array()) return false;
  for (const auto& e : v) {
    if (!e.is_number_integer()) return false;
  }
  return true;
}

}  // namespace

Histogram ParseHistogramCsv(std::istream& in) {
  const auto rows = ReadCsv(in, "value,count");
  Require(!rows.empty(), "histogram CSV has no rows");
  std::vector<int64_t> counts;
  int first = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    Require(rows[i].size() == 2, "histogram rows need two fields");
    const int value = static_cast<int>(ParseInt(rows[i][0], "value"));
    if (i == 0) first = value;
    Require(value == first + static_cast<int>(i),
            "histogram values must be contiguous and ascending");
    counts.push_back(ParseInt(rows[i][1], "count"));
  }
  return Histogram(first, std::move(counts));
}

void WriteHistogramCsv(std::ostream& out, const Histogram& h) {
  out << "value,count\n";
  for (int i = 0; i < h.size(); ++i) {
    out << h.support_min() + i << ',' << h.counts()[i] << '\n';
  }
}

std::vector<GroupedClass> ParseGroupedCsv(std::istream& in) {
  const auto rows = ReadCsv(in, "range_start,range_end,count");
  std::vector<GroupedClass> groups;
  for (const auto& row : rows) {
    Require(row.size() == 3, "grouped rows need three fields");
    GroupedClass g;
    g.start = static_cast<int>(ParseInt(row[0], "range_start"));
    if (row[1] != "open") {
      g.end = static_cast<int>(ParseInt(row[1], "range_end"));
    }
    g.count = ParseInt(row[2], "count");
    groups.push_back(g);
  }
  return groups;
}

Histogram ReadHistogramFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ParseHistogramCsv(in);
}

void WriteHistogramFile(const std::string& path, const Histogram& h) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  WriteHistogramCsv(out, h);
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void WriteJsonFile(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << '\n';
}

Json PublishedMetadataToJson(const PublishedDataset& data) {
  Json doc;
  doc["schema"] = kPublishedSchema;
  doc["noise"] = {{"support_min", data.noise.pmf().support_min()},
                  {"probs", data.noise.pmf().probs()}};
  doc["truncation_at"] =
      data.truncation_at ? Json(*data.truncation_at) : Json(nullptr);
  doc["declared_support"] = {{"min", data.declared_support.min},
                             {"max", data.declared_support.max}};
  doc["masked_total"] = data.masked.total();
  return doc;
}

PublishedDataset PublishedFromJson(const Json& metadata, Histogram masked) {
  ValidateDocument(metadata);
  Require(metadata["schema"] == kPublishedSchema,
          "not a published metadata document");
  Require(metadata["masked_total"].get<int64_t>() == masked.total(),
          "masked histogram total does not match the metadata");
  NoiseSpec noise(Pmf(metadata["noise"]["support_min"].get<int>(),
                      metadata["noise"]["probs"].get<std::vector<double>>()));
  std::optional<int> t;
  if (!metadata["truncation_at"].is_null()) {
    t = metadata["truncation_at"].get<int>();
  }
  const IntRange declared{metadata["declared_support"]["min"].get<int>(),
                          metadata["declared_support"]["max"].get<int>()};
  return PublishedDataset{std::move(masked), std::move(noise), t, declared};
}

Json EstimateReportToJson(const EstimateReport& report) {
  Json doc;
  doc["schema"] = kEstimateSchema;
  doc["method"] = MethodName(report.method);
  doc["support_min"] = report.classes.empty() ? 0 : report.classes.front().min;
  Json classes = Json::array();
  for (const IntRange& c : report.classes) classes.push_back({c.min, c.max});
  doc["classes"] = classes;
  doc["p_hat"] = report.p_hat;
  doc["cdf"] = Cdf(std::span(report.p_hat));
  doc["negative_components"] = report.negative_components;
  doc["iterations"] = report.iterations;
  doc["final_loglik"] = NumberOrNull(report.final_loglik);
  doc["warnings"] = report.warnings;
  return doc;
}

EstimateReport EstimateReportFromJson(const Json& doc) {
  ValidateDocument(doc);
  Require(doc["schema"] == kEstimateSchema, "not an estimate report");
  EstimateReport report;
  const auto method = ParseMethod(doc["method"].get<std::string>());
  Require(method.has_value(), "unknown method in report");
  report.method = *method;
  report.p_hat = doc["p_hat"].get<std::vector<double>>();
  for (const auto& c : doc["classes"]) {
    report.classes.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
  }
  Require(report.classes.size() == report.p_hat.size(),
          "classes and p_hat differ in length");
  report.negative_components =
      doc["negative_components"].get<std::vector<int>>();
  report.iterations = doc["iterations"].get<int>();
  report.final_loglik = doc["final_loglik"].is_null()
                            ? std::numeric_limits<double>::quiet_NaN()
                            : doc["final_loglik"].get<double>();
  report.warnings = doc["warnings"].get<std::vector<std::string>>();
  return report;
}

Pmf EstimatePmf(const EstimateReport& report) {
  Require(!report.classes.empty(), "empty estimate");
  for (size_t i = 0; i < report.classes.size(); ++i) {
    Require(report.classes[i].size() == 1 &&
                report.classes[i].min == report.classes.front().min +
                                             static_cast<int>(i),
            "estimate has merged classes; quantiles need per-value "
            "probabilities");
  }
  if (!report.negative_components.empty()) {
    throw std::invalid_argument("estimate has negative components");
  }
  return Pmf(report.classes.front().min, report.p_hat);
}

Json BootstrapReportToJson(const BootstrapReport& report, Method method,
                           int64_t n, int B, uint64_t seed) {
  Json doc;
  doc["schema"] = kBootstrapSchema;
  doc["method"] = MethodName(method);
  doc["n"] = n;
  doc["B"] = B;
  doc["seed"] = seed;
  doc["mean"] = report.mean;
  doc["variance"] = report.variance;
  doc["mse"] = report.mse;
  if (!report.mse_vs_truth.empty()) doc["mse_vs_truth"] = report.mse_vs_truth;
  doc["replicates"] = report.replicates;
  doc["failed_replicates"] = report.failed_replicates;
  return doc;
}

Json AuditReportToJson(const AuditInstance& instance,
                       const AuditProbability& exact) {
  Json doc;
  doc["schema"] = kAuditSchema;
  doc["x_counts"] = instance.x_counts;
  doc["z_counts"] = instance.z_counts;
  doc["noise_size"] = instance.noise_size;
  doc["consistent_with_rows"] = exact.consistent_with_rows.str();
  doc["consistent"] = exact.consistent.str();
  doc["exact"] = exact.exact.str();
  doc["probability"] = exact.value;
  doc["log10_probability"] = NumberOrNull(exact.log10_value);
  return doc;
}

void ValidateDocument(const Json& doc) {
  Require(doc.is_object(), "document must be a JSON object");
  RequireField(doc, "schema", doc.contains("schema") &&
                                  doc["schema"].is_string());
  const std::string schema = doc["schema"];
  auto has = [&](const char* key, auto pred) {
    RequireField(doc, key, doc.contains(key) && pred(doc[key]));
  };
  auto is_int = [](const Json& v) { return v.is_number_integer(); };
  auto is_num = [](const Json& v) { return v.is_number(); };
  auto is_num_or_null = [](const Json& v) {
    return v.is_number() || v.is_null();
  };
  auto is_str = [](const Json& v) { return v.is_string(); };
  auto num_array = [](const Json& v) { return IsNumberArray(v); };
  auto int_array = [](const Json& v) { return IsIntArray(v); };

  if (schema == kPublishedSchema) {
    has("noise", [](const Json& v) {
      return v.is_object() && v.contains("support_min") &&
             v["support_min"].is_number_integer() && v.contains("probs") &&
             IsNumberArray(v["probs"]);
    });
    has("truncation_at",
        [](const Json& v) { return v.is_null() || v.is_number_integer(); });
    has("declared_support", [](const Json& v) {
      return v.is_object() && v.contains("min") &&
             v["min"].is_number_integer() && v.contains("max") &&
             v["max"].is_number_integer();
    });
    has("masked_total", is_int);
  } else if (schema == kEstimateSchema) {
    has("method", is_str);
    has("support_min", is_int);
    has("classes", [](const Json& v) {
      if (!v.is_array()) return false;
      for (const auto& c : v) {
        if (!IsIntArray(c) || c.size() != 2) return false;
      }
      return true;
    });
    has("p_hat", num_array);
    has("cdf", num_array);
    has("negative_components", int_array);
    has("iterations", is_int);
    has("final_loglik", is_num_or_null);
    has("warnings", [](const Json& v) {
      if (!v.is_array()) return false;
      for (const auto& e : v) {
        if (!e.is_string()) return false;
      }
      return true;
    });
  } else if (schema == kQuantilesSchema) {
    has("quantiles", [](const Json& v) {
      if (!v.is_array()) return false;
      for (const auto& e : v) {
        if (!e.is_object() || !e.contains("q") || !e["q"].is_number() ||
            !e.contains("value") || !e["value"].is_number_integer()) {
          return false;
        }
      }
      return true;
    });
  } else if (schema == kMaxSchema) {
    has("eps", is_num);
    has("estimate", is_int);
  } else if (schema == kLlnMaxSchema) {
    has("extra_rounds", is_int);
    has("seed", is_int);
    has("noise_mean", is_num);
    has("estimate", is_num);
  } else if (schema == kAuditSchema) {
    has("x_counts", int_array);
    has("z_counts", int_array);
    has("noise_size", is_int);
    has("consistent_with_rows", is_str);
    has("consistent", is_str);
    has("exact", is_str);
    has("probability", is_num);
    has("log10_probability", is_num_or_null);
    if (doc.contains("monte_carlo")) {
      has("monte_carlo", [](const Json& v) {
        return v.is_object() && v.contains("samples") &&
               v["samples"].is_number_integer() && v.contains("estimate") &&
               v["estimate"].is_number() && v.contains("std_error") &&
               (v["std_error"].is_number() || v["std_error"].is_null());
      });
    }
  } else if (schema == kBootstrapSchema) {
    has("method", is_str);
    has("n", is_int);
    has("B", is_int);
    has("seed", is_int);
    has("mean", num_array);
    has("variance", num_array);
    has("mse", num_array);
    if (doc.contains("mse_vs_truth")) has("mse_vs_truth", num_array);
    has("replicates", is_int);
    has("failed_replicates", is_int);
  } else {
    throw std::invalid_argument("unknown schema '" + schema + "'");
  }
}

}  // namespace obfus
