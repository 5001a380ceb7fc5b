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

// obfus: batch front end for masking, estimation and auditing.
//
// Exit codes: 0 ok, 2 usage, 3 precondition violated, 4 runtime failure.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "obfus/assess.h"
#include "obfus/core_model.h"
#include "obfus/estimators.h"
#include "obfus/io.h"
#include "obfus/likelihood.h"
#include "obfus/obfuscate.h"
#include "obfus/preprocess.h"
#include "obfus/privacy_audit.h"
#include "obfus/quantile_range.h"
#include "obfus/synth.h"

namespace {

using obfus::Json;

constexpr int kExitUsage = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitRuntime = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

int ToInt(const std::string& s, const std::string& flag) {
  try {
    size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError(flag + ": expected an integer, got '" + s + "'");
}

// uniform:A:B  or  pmf:MIN:P0,P1,...
obfus::NoiseSpec ParseNoise(const std::string& text) {
  const auto parts = Split(text, ':');
  if (parts.size() == 3 && parts[0] == "uniform") {
    const int a = ToInt(parts[1], "--noise");
    const int b = ToInt(parts[2], "--noise");
    if (b < a) throw UsageError("--noise: uniform needs A <= B");
    return obfus::NoiseSpec::DiscreteUniform(a, b);
  }
  if (parts.size() == 3 && parts[0] == "pmf") {
    std::vector<double> probs;
    for (const auto& p : Split(parts[2], ',')) {
      try {
        probs.push_back(std::stod(p));
      } catch (const std::exception&) {
        throw UsageError("--noise: bad probability '" + p + "'");
      }
    }
    try {
      return obfus::NoiseSpec(obfus::Pmf(ToInt(parts[1], "--noise"), probs));
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--noise: ") + e.what());
    }
  }
  throw UsageError("--noise must be uniform:A:B or pmf:MIN:P0,P1,...");
}

obfus::IntRange ParseRange(const std::string& text, const std::string& flag) {
  const auto parts = Split(text, ':');
  if (parts.size() != 2) throw UsageError(flag + " must be MIN:MAX");
  obfus::IntRange r{ToInt(parts[0], flag), ToInt(parts[1], flag)};
  if (r.max < r.min) throw UsageError(flag + ": MIN exceeds MAX");
  return r;
}

std::vector<int64_t> ParseCounts(const std::string& text,
                                 const std::string& flag) {
  std::vector<int64_t> out;
  for (const auto& p : Split(text, ',')) out.push_back(ToInt(p, flag));
  return out;
}

void Emit(const Json& doc, const std::string& path) {
  if (path.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    obfus::WriteJsonFile(path, doc);
  }
}

obfus::PublishedDataset LoadBundle(const std::string& masked,
                                   const std::string& meta) {
  return obfus::PublishedFromJson(obfus::ReadJsonFile(meta),
                                  obfus::ReadHistogramFile(masked));
}

void AddPairOptions(CLI::App* cmd, obfus::CoordinateMleOptions& coord) {
  const std::map<std::string, obfus::PairSchedule> schedules = {
      {"adjacent", obfus::PairSchedule::kAdjacent},
      {"all", obfus::PairSchedule::kAllPairs}};
  cmd->add_option("--pairs", coord.schedule,
                  "Pairs swept by coord: adjacent|all")
      ->transform(CLI::CheckedTransformer(schedules));
  cmd->add_option("--refine", coord.refine_levels,
                  "Finer local grid levels after convergence (coord)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Additive-noise masking, PMF recovery and disclosure audit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate Poisson-mixture data");
  obfus::GeneratorConfig gen;
  std::string synth_out;
  synth->add_option("--n", gen.n, "Number of individuals")->required();
  synth->add_option("--exp", gen.exp_param,
                    "Rate of the exponential prior on the Poisson mean")
      ->capture_default_str();
  synth->add_option("--max-class", gen.max_class, "Largest class")
      ->capture_default_str();
  synth->add_option("--seed", gen.seed, "RNG seed")->required();
  synth->add_option("-o,--out", synth_out, "Histogram CSV")->required();

  // obfuscate
  auto* obf = app.add_subcommand("obfuscate", "Mask, truncate and publish");
  std::string obf_in, obf_noise, obf_declare, obf_out, obf_meta;
  std::optional<int> obf_truncate;
  uint64_t obf_seed = 0;
  obf->add_option("--in", obf_in, "Raw histogram CSV")->required();
  obf->add_option("--noise", obf_noise, "uniform:A:B or pmf:MIN:P0,P1,...")
      ->required();
  obf->add_option("--truncate", obf_truncate,
                  "Collapse masked values >= T into one bucket");
  obf->add_option("--declare-range", obf_declare,
                  "Announced X-support MIN:MAX");
  obf->add_option("--seed", obf_seed, "RNG seed")->required();
  obf->add_option("-o,--out", obf_out, "Masked histogram CSV")->required();
  obf->add_option("--meta", obf_meta, "Metadata JSON")->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "Recover the PMF of X");
  std::string est_masked, est_meta, est_method = "coord", est_truth,
                                    est_plot, est_out;
  obfus::CoordinateMleOptions coord;
  est->add_option("--masked", est_masked, "Masked histogram CSV")->required();
  est->add_option("--meta", est_meta, "Metadata JSON")->required();
  est->add_option("--method", est_method,
                  "ls|ls-qr|mle-fwd|mle-bwd|mle-combined|coord|empirical")
      ->capture_default_str();
  est->add_option("--grid", coord.grid, "Grid size G (coord)")
      ->capture_default_str();
  est->add_option("--max-epochs", coord.max_epochs, "Sweep limit (coord)")
      ->capture_default_str();
  est->add_option("--tol", coord.tol, "Per-sweep gain threshold (coord)")
      ->capture_default_str();
  AddPairOptions(est, coord);
  std::vector<int> est_merge_class;
  bool est_merge_empty = false;
  est->add_option("--merge-class", est_merge_class,
                  "Estimate the class holding value V together with the "
                  "next class (repeatable)");
  est->add_flag("--merge-empty", est_merge_empty,
                "Merge every empty interior masked value into the next one");
  est->add_option("--truth", est_truth, "True histogram CSV");
  est->add_option("--plot-csv", est_plot,
                  "Write value,estimated,true (needs --truth)");
  est->add_option("-o,--out", est_out, "Report JSON (stdout if omitted)");

  // quantiles
  auto* qnt = app.add_subcommand("quantiles", "Quantiles of an estimate");
  std::string qnt_report, qnt_out;
  std::vector<double> qnt_levels;
  qnt->add_option("--report", qnt_report, "Estimate report JSON")->required();
  qnt->add_option("--q", qnt_levels, "Levels in (0, 1]")->required();
  qnt->add_option("-o,--out", qnt_out, "Output JSON");

  // max
  auto* mx = app.add_subcommand("max", "First value where the CDF reaches 1");
  std::string mx_report, mx_out;
  double mx_eps = 1e-9;
  mx->add_option("--report", mx_report, "Estimate report JSON")->required();
  mx->add_option("--eps", mx_eps, "CDF >= 1 - eps")->capture_default_str();
  mx->add_option("-o,--out", mx_out, "Output JSON");

  // lln-max
  auto* lln = app.add_subcommand("lln-max", "Repeated-noise maximum estimate");
  std::string lln_masked, lln_meta, lln_out;
  int lln_rounds = 999;
  uint64_t lln_seed = 0;
  lln->add_option("--masked", lln_masked, "Masked histogram CSV")->required();
  lln->add_option("--meta", lln_meta, "Metadata JSON")->required();
  lln->add_option("--rounds", lln_rounds, "Extra noise rounds")
      ->capture_default_str();
  lln->add_option("--seed", lln_seed, "RNG seed")->required();
  lln->add_option("-o,--out", lln_out, "Output JSON");

  // audit
  auto* aud = app.add_subcommand("audit", "Matrix-counting disclosure audit");
  std::string aud_x, aud_z, aud_assign, aud_out;
  int aud_m = 0;
  int64_t aud_cap = obfus::kDefaultAuditStateCap;
  int64_t aud_samples = 0;
  std::optional<uint64_t> aud_seed;
  aud->add_option("--x-counts", aud_x, "Row sums, comma separated");
  aud->add_option("--z-counts", aud_z, "Anti-diagonal sums");
  aud->add_option("--noise-size", aud_m, "Number of noise values");
  aud->add_option("--assignment", aud_assign,
                  "Explicit matrix, rows separated by ';'");
  aud->add_option("--state-cap", aud_cap, "Exact DP state limit")
      ->capture_default_str();
  aud->add_option("--mc-samples", aud_samples,
                  "Also run the Monte Carlo audit");
  aud->add_option("--seed", aud_seed, "RNG seed (Monte Carlo)");
  aud->add_option("-o,--out", aud_out, "Output JSON");

  // bootstrap
  auto* boot = app.add_subcommand("bootstrap", "Parametric bootstrap");
  std::string boot_report, boot_masked, boot_meta, boot_method = "coord",
                                                   boot_truth, boot_out;
  int boot_b = 200;
  int64_t boot_n = 0;
  int boot_threads = 0;
  uint64_t boot_seed = 0;
  obfus::CoordinateMleOptions boot_coord;
  boot->add_option("--report", boot_report, "Estimate report JSON")
      ->required();
  boot->add_option("--masked", boot_masked, "Masked histogram CSV")
      ->required();
  boot->add_option("--meta", boot_meta, "Metadata JSON")->required();
  boot->add_option("--method", boot_method, "Estimator to re-run")
      ->capture_default_str();
  boot->add_option("--B", boot_b, "Replicates")->capture_default_str();
  boot->add_option("--n", boot_n, "Sample size (default: masked total)");
  boot->add_option("--seed", boot_seed, "RNG seed")->required();
  boot->add_option("--truth", boot_truth, "True histogram CSV");
  boot->add_option("--threads", boot_threads, "Worker threads (0 = auto)");
  boot->add_option("--max-epochs", boot_coord.max_epochs,
                   "Sweep limit (coord)")
      ->capture_default_str();
  AddPairOptions(boot, boot_coord);
  boot->add_option("-o,--out", boot_out, "Output JSON");

  // split-classes
  auto* split = app.add_subcommand("split-classes",
                                   "Grouped table to per-value histogram");
  std::string split_in, split_out;
  double split_mean = 0.0;
  std::optional<int> split_cap;
  split->add_option("--grouped", split_in, "Grouped CSV")->required();
  split->add_option("--mean", split_mean, "Poisson reference mean")
      ->required();
  split->add_option("--cap", split_cap, "Largest value of the open class");
  split->add_option("-o,--out", split_out, "Histogram CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) {
      const obfus::Histogram h = obfus::GenPoissonMixture(gen);
      obfus::WriteHistogramFile(synth_out, h);
      std::cout << "wrote " << h.size() << " classes, total " << h.total()
                << " to " << synth_out << '\n';
    } else if (*obf) {
      obfus::ObfuscationScheme scheme{ParseNoise(obf_noise), obf_truncate,
                                      std::nullopt};
      if (!obf_declare.empty()) {
        scheme.declared_support = ParseRange(obf_declare, "--declare-range");
      }
      const obfus::Histogram raw = obfus::ReadHistogramFile(obf_in);
      const obfus::Histogram masked = obfus::Mask(raw, scheme, obf_seed);
      const obfus::PublishedDataset pub =
          obfus::Publish(masked, scheme, raw.support());
      obfus::WriteHistogramFile(obf_out, pub.masked);
      obfus::WriteJsonFile(obf_meta, obfus::PublishedMetadataToJson(pub));
      std::cout << "masked " << raw.total() << " individuals into "
                << pub.masked.size() << " published classes\n";
    } else if (*est) {
      const auto method = obfus::ParseMethod(est_method);
      if (!method) throw UsageError("--method: unknown '" + est_method + "'");
      if (!est_plot.empty() && est_truth.empty()) {
        throw UsageError("--plot-csv needs --truth");
      }
      const obfus::PublishedDataset pub = LoadBundle(est_masked, est_meta);
      obfus::LikelihoodModel model = obfus::BuildLikelihoodModel(pub);
      if (est_merge_empty) model = obfus::MergeEmptyMaskedValues(model);
      for (int v : est_merge_class) {
        const auto& classes = model.mixing.col_classes();
        const auto it =
            std::find_if(classes.begin(), classes.end(),
                         [v](const obfus::IntRange& c) { return c.Contains(v); });
        if (it == classes.end()) {
          throw std::invalid_argument("--merge-class: value " +
                                      std::to_string(v) +
                                      " is outside the declared support");
        }
        model = obfus::MergeClasses(model,
                                    static_cast<int>(it - classes.begin()));
      }
      obfus::EstimateOptions options;
      options.coordinate = coord;
      const obfus::EstimateReport report =
          obfus::Estimate(model, *method, options);
      Json doc = obfus::EstimateReportToJson(report);
      if (!est_truth.empty()) {
        const obfus::Pmf truth =
            obfus::PmfFromHistogram(obfus::ReadHistogramFile(est_truth));
        std::vector<double> per_value(report.classes.back().max -
                                          report.classes.front().min + 1,
                                      0.0);
        const int lo = report.classes.front().min;
        for (int v = lo; v < lo + static_cast<int>(per_value.size()); ++v) {
          per_value[v - lo] = truth.At(v);
        }
        const auto true_p =
            obfus::AggregateToClasses(per_value, lo, report.classes);
        doc["true_p"] = true_p;
        if (!est_plot.empty()) {
          std::ofstream out(est_plot);
          if (!out) throw std::runtime_error("cannot write " + est_plot);
          out << "value,estimated,true\n";
          char line[128];
          for (size_t c = 0; c < report.classes.size(); ++c) {
            std::snprintf(line, sizeof line, "%d,%.17g,%.17g\n",
                          report.classes[c].min, report.p_hat[c], true_p[c]);
            out << line;
          }
        }
      }
      Emit(doc, est_out);
    } else if (*qnt) {
      const obfus::Pmf p = obfus::EstimatePmf(
          obfus::EstimateReportFromJson(obfus::ReadJsonFile(qnt_report)));
      Json doc;
      doc["schema"] = obfus::kQuantilesSchema;
      doc["quantiles"] = Json::array();
      for (double q : qnt_levels) {
        doc["quantiles"].push_back({{"q", q}, {"value", obfus::Quantile(p, q)}});
      }
      Emit(doc, qnt_out);
    } else if (*mx) {
      const obfus::Pmf p = obfus::EstimatePmf(
          obfus::EstimateReportFromJson(obfus::ReadJsonFile(mx_report)));
      Json doc;
      doc["schema"] = obfus::kMaxSchema;
      doc["eps"] = mx_eps;
      doc["estimate"] = obfus::EstimateMax(p, mx_eps);
      Emit(doc, mx_out);
    } else if (*lln) {
      const obfus::PublishedDataset pub = LoadBundle(lln_masked, lln_meta);
      if (pub.truncation_at) {
        throw std::invalid_argument("lln-max needs untruncated masked data");
      }
      Json doc;
      doc["schema"] = obfus::kLlnMaxSchema;
      doc["extra_rounds"] = lln_rounds;
      doc["seed"] = lln_seed;
      doc["noise_mean"] = pub.noise.Mean();
      doc["estimate"] =
          obfus::LlnMaxEstimate(pub.masked, pub.noise, lln_rounds, lln_seed);
      Emit(doc, lln_out);
    } else if (*aud) {
      obfus::AuditInstance inst;
      if (!aud_assign.empty()) {
        if (!aud_x.empty() || !aud_z.empty() || aud_m != 0) {
          throw UsageError("--assignment excludes --x-counts/--z-counts/"
                           "--noise-size");
        }
        std::vector<std::vector<int64_t>> matrix;
        for (const auto& row : Split(aud_assign, ';')) {
          matrix.push_back(ParseCounts(row, "--assignment"));
        }
        inst = obfus::AuditInstance::FromAssignment(matrix);
      } else {
        if (aud_x.empty() || aud_z.empty() || aud_m < 1) {
          throw UsageError("audit needs --assignment or all of --x-counts, "
                           "--z-counts and --noise-size");
        }
        inst.x_counts = ParseCounts(aud_x, "--x-counts");
        inst.z_counts = ParseCounts(aud_z, "--z-counts");
        inst.noise_size = aud_m;
      }
      if (aud_samples > 0 && !aud_seed) {
        throw UsageError("--mc-samples needs --seed");
      }
      Json doc = obfus::AuditReportToJson(
          inst, obfus::ConditionalProbability(inst, aud_cap));
      if (aud_samples > 0) {
        const auto mc = obfus::MonteCarloAudit(inst, aud_samples, *aud_seed);
        doc["monte_carlo"] = {
            {"samples", mc.samples},
            {"seed", *aud_seed},
            {"estimate", mc.estimate},
            {"std_error",
             mc.std_error_defined ? Json(mc.std_error) : Json(nullptr)}};
      }
      Emit(doc, aud_out);
    } else if (*boot) {
      const auto method = obfus::ParseMethod(boot_method);
      if (!method) throw UsageError("--method: unknown '" + boot_method + "'");
      const obfus::PublishedDataset pub = LoadBundle(boot_masked, boot_meta);
      const obfus::LikelihoodModel model = obfus::BuildLikelihoodModel(pub);
      const obfus::EstimateReport fitted =
          obfus::EstimateReportFromJson(obfus::ReadJsonFile(boot_report));
      if (fitted.classes != model.mixing.col_classes()) {
        throw std::invalid_argument("estimate report does not match the "
                                    "published bundle's classes");
      }
      obfus::BootstrapOptions options;
      options.estimate.coordinate = boot_coord;
      options.threads = boot_threads;
      if (!boot_truth.empty()) {
        const obfus::Pmf truth =
            obfus::PmfFromHistogram(obfus::ReadHistogramFile(boot_truth));
        for (const auto& c : fitted.classes) {
          double mass = 0.0;
          for (int v = c.min; v <= c.max; ++v) mass += truth.At(v);
          options.truth.push_back(mass);
        }
      }
      const int64_t n = boot_n > 0 ? boot_n : pub.masked.total();
      const obfus::BootstrapReport rep = obfus::Bootstrap(
          model, fitted.p_hat, n, boot_b, *method, boot_seed, options);
      Emit(obfus::BootstrapReportToJson(rep, *method, n, boot_b, boot_seed),
           boot_out);
    } else if (*split) {
      std::ifstream in(split_in);
      if (!in) throw std::runtime_error("cannot open " + split_in);
      const auto groups = obfus::ParseGroupedCsv(in);
      const obfus::Histogram h =
          obfus::SplitGrouped(groups, split_mean, split_cap);
      obfus::WriteHistogramFile(split_out, h);
      std::cout << "wrote values " << h.support_min() << ".."
                << h.support_max() << ", total " << h.total() << '\n';
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "precondition failed: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
