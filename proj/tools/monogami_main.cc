/*
 * Copyright 2026 The monogami Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// monogami: fit monotone GAM-plus-interaction tree models and export their
// functional ANOVA terms.
//
// Exit codes: 0 ok, 1 audit failure, 2 usage, 3 IO/parse, 4 pipeline error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "monogami/anova.h"
#include "monogami/booster.h"
#include "monogami/dataset.h"
#include "monogami/errors.h"
#include "monogami/filter.h"
#include "monogami/pipeline.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace monogami {
namespace {

enum ExitCode { kOk = 0, kAuditFailed = 1, kUsage = 2, kIo = 3, kPipeline = 4 };

// Thrown for flag values that parse but are out of range.
class UsageError : public Error {
 public:
  using Error::Error;
};

template <typename Fn>
auto RunStage(const std::string& stage, Fn&& fn) {
  try {
    return fn();
  } catch (const IoError&) {
    throw;
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(stage, e.what());
  }
}

std::vector<int> ParseMonotone(const std::string& text, std::size_t p) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "+" || item == "+1" || item == "1") {
      out.push_back(1);
    } else if (item == "-" || item == "-1") {
      out.push_back(-1);
    } else if (item == "0") {
      out.push_back(0);
    } else {
      throw UsageError("bad monotone entry '" + item + "' (use +, - or 0)");
    }
  }
  if (out.size() != p) {
    throw UsageError("monotone spec has " + std::to_string(out.size()) + " entries but the data has " +
                     std::to_string(p) + " features");
  }
  return out;
}

json MetricsJson(const Metrics& m) {
  if (m.kind == ResponseKind::kBinary) return {{"auc", m.auc}, {"logloss", m.logloss}};
  return {{"rmse", m.rmse}};
}

json BoostJson(const BoostConfig& c) {
  return {{"n_trees", c.n_trees},
          {"max_depth", c.max_depth},
          {"learning_rate", c.learning_rate},
          {"reg_lambda", c.reg_lambda},
          {"gamma", c.gamma},
          {"min_child_hessian", c.min_child_hessian},
          {"early_stopping_rounds", c.early_stopping_rounds}};
}

json PairsJson(const std::vector<PairScore>& pairs) {
  json out = json::array();
  for (const auto& ps : pairs) out.push_back({{"j", ps.j}, {"k", ps.k}, {"score", ps.score}});
  return out;
}

json ImportancesJson(const std::vector<TermImportance>& imps, const std::vector<std::string>& names) {
  json out = json::array();
  for (const auto& imp : imps) {
    out.push_back({{"term", imp.term.Label(names)}, {"importance", imp.importance}});
  }
  return out;
}

HyperGrid LoadGrid(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open grid file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("grid file does not parse: " + std::string(e.what()));
  }
  HyperGrid grid;
  try {
    if (doc.contains("n_trees")) grid.n_trees = doc["n_trees"].get<std::vector<std::size_t>>();
    if (doc.contains("max_depth")) grid.max_depth = doc["max_depth"].get<std::vector<int>>();
    if (doc.contains("learning_rate")) grid.learning_rate = doc["learning_rate"].get<std::vector<double>>();
    if (doc.contains("reg_lambda")) grid.reg_lambda = doc["reg_lambda"].get<std::vector<double>>();
    if (doc.contains("min_child_hessian")) {
      grid.min_child_hessian = doc["min_child_hessian"].get<std::vector<double>>();
    }
    if (doc.contains("gamma")) grid.gamma = doc["gamma"].get<double>();
    if (doc.contains("early_stopping_rounds")) {
      grid.early_stopping_rounds = doc["early_stopping_rounds"].get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw IoError("malformed grid file: " + std::string(e.what()));
  }
  try {
    grid.Expand(0);
  } catch (const ConfigError& e) {
    throw UsageError(std::string("invalid grid: ") + e.what());
  }
  return grid;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text << '\n';
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

void RequireFile(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw IoError("no such file '" + path.string() + "'");
}

Dataset LoadData(const fs::path& path, const std::string& kind) {
  RequireFile(path);
  if (kind == "auto") return ReadCsv(path, ResponseKind::kContinuous, true);
  return ReadCsv(path, ResponseKindFromString(kind), false);
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string model = "first";
  std::size_t n = 15000;
  double sigma = 2.0;
  std::string kind = "continuous";
  std::uint64_t seed = 1;
  std::string out;
};

int CmdSimulate(const SimulateArgs& a) {
  if (a.sigma < 0.0 || !std::isfinite(a.sigma)) throw UsageError("--sigma must be >= 0");
  if (a.n < 3) throw UsageError("--n must be at least 3 to fill train/valid/test");
  SimConfig cfg;
  cfg.n = a.n;
  cfg.sigma = a.sigma;
  cfg.seed = a.seed;
  cfg.response_kind = ResponseKindFromString(a.kind);
  EnsureDir(a.out);
  const Dataset ds = a.model == "first" ? GenerateFirstOrder(cfg) : GenerateSecondOrder(cfg);
  const DatasetSplit split = SplitDataset(ds, SplitFractions{}, a.seed + 1);
  const fs::path out(a.out);
  WriteCsv(split.train, out / "train.csv");
  WriteCsv(split.valid, out / "valid.csv");
  WriteCsv(split.test, out / "test.csv");
  const json summary = {{"model", a.model},
                        {"kind", a.kind},
                        {"n", a.n},
                        {"sigma", a.sigma},
                        {"seed", a.seed},
                        {"sizes",
                         {{"train", split.train.num_rows()},
                          {"valid", split.valid.num_rows()},
                          {"test", split.test.num_rows()}}},
                        {"out", out.string()}};
  std::cout << summary.dump() << '\n';
  return kOk;
}

struct FilterArgs {
  std::string train, valid, kind = "auto";
  long long k = -1;
  std::size_t bins = 32;
};

int CmdFilter(const FilterArgs& a) {
  const Dataset train = LoadData(a.train, a.kind);
  const Dataset valid = LoadData(a.valid, a.kind);
  const std::size_t p = train.num_features();
  const std::size_t available = p * (p - 1) / 2;
  const std::size_t k = a.k < 0 ? available : static_cast<std::size_t>(a.k);
  if (k > available) {
    throw UsageError("--k " + std::to_string(k) + " exceeds the " + std::to_string(available) +
                     " available pairs");
  }
  PipelineConfig cfg;
  cfg.filter_bins = a.bins;
  const auto pairs = RunStage("filter", [&] { return SelectPairs(train, valid, cfg, k); });
  std::cout << PairsJson(pairs).dump() << '\n';
  return kOk;
}

struct FitArgs {
  std::string train, valid, test, monotone, out, grid, kind = "auto";
  long long k = 0;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t bins = 32;
};

int CmdFit(const FitArgs& a) {
  if (a.k < 0) throw UsageError("--k must be >= 0");
  if (a.threads < 1) throw UsageError("--threads must be >= 1");
  const Dataset train = LoadData(a.train, a.kind);
  const Dataset valid = LoadData(a.valid, a.kind);
  const Dataset test = LoadData(a.test, a.kind);
  const std::size_t p = train.num_features();
  for (const Dataset* ds : {&valid, &test}) {
    if (ds->num_features() != p || ds->response_kind() != train.response_kind()) {
      throw UsageError("train, valid and test must share columns and response kind");
    }
  }
  if (static_cast<std::size_t>(a.k) > p * (p - 1) / 2) {
    throw UsageError("--k " + std::to_string(a.k) + " exceeds the " + std::to_string(p * (p - 1) / 2) +
                     " available pairs");
  }
  PipelineConfig cfg;
  cfg.num_pairs = static_cast<std::size_t>(a.k);
  cfg.monotone = ParseMonotone(a.monotone, p);
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  cfg.filter_bins = a.bins;
  if (!a.grid.empty()) cfg.grid = LoadGrid(a.grid);
  const fs::path out(a.out);
  EnsureDir(out);

  const FittedGami fit = RunPipeline(train, valid, test, cfg);

  const fs::path model_path = out / "model.json";
  SaveModel(fit.ensemble, model_path);
  const fs::path terms_manifest =
      ExportTerms(fit.terms, fit.importances, train.feature_names(), out / "terms");

  json grid_results = json::array();
  for (const auto& g : fit.grid_results) {
    grid_results.push_back(
        {{"config", BoostJson(g.config)}, {"num_trees", g.num_trees}, {"valid_loss", g.valid_loss}});
  }
  const json manifest = {
      {"config",
       {{"k", cfg.num_pairs},
        {"monotone", cfg.monotone},
        {"seed", cfg.seed},
        {"filter_bins", cfg.filter_bins},
        {"grid",
         {{"n_trees", cfg.grid.n_trees},
          {"max_depth", cfg.grid.max_depth},
          {"learning_rate", cfg.grid.learning_rate},
          {"reg_lambda", cfg.grid.reg_lambda},
          {"min_child_hessian", cfg.grid.min_child_hessian},
          {"gamma", cfg.grid.gamma},
          {"early_stopping_rounds", cfg.grid.early_stopping_rounds}}},
        {"inputs", {{"train", a.train}, {"valid", a.valid}, {"test", a.test}}}}},
      {"selected_pairs", PairsJson(fit.selected_pairs)},
      {"chosen", BoostJson(fit.chosen)},
      {"num_trees", fit.ensemble.trees.size()},
      {"grid_results", grid_results},
      {"metrics",
       {{"train", MetricsJson(fit.train)}, {"valid", MetricsJson(fit.valid)}, {"test", MetricsJson(fit.test)}}},
      {"importances", ImportancesJson(fit.importances, train.feature_names())},
      {"files", {{"model", model_path.string()}, {"terms_manifest", terms_manifest.string()}}},
  };
  WriteText(out / "run.json", manifest.dump());
  std::cout << manifest.dump() << '\n';
  return kOk;
}

struct ModelDataArgs {
  std::string model, train, out, kind = "auto";
  std::vector<std::string> data;
  std::size_t lines = 1000;
  std::size_t grid = 50;
  std::uint64_t seed = 0;
};

TermStore PurifiedTerms(const TreeEnsemble& ens, const Dataset& train) {
  if (train.num_features() != ens.num_features()) {
    throw UsageError("train has " + std::to_string(train.num_features()) + " features, model has " +
                     std::to_string(ens.num_features()));
  }
  return RunStage("purify", [&] { return Purify(ParseEnsemble(ens), train); });
}

int CmdExportTerms(const ModelDataArgs& a) {
  RequireFile(a.model);
  const TreeEnsemble ens = LoadModel(a.model);
  const Dataset train = LoadData(a.train, a.kind);
  const TermStore terms = PurifiedTerms(ens, train);
  const auto imps = TermImportances(terms, train);
  const fs::path manifest = ExportTerms(terms, imps, train.feature_names(), a.out);
  std::cout << json{{"terms_manifest", manifest.string()},
                    {"importances", ImportancesJson(imps, train.feature_names())}}
                   .dump()
            << '\n';
  return kOk;
}

int CmdVerify(const ModelDataArgs& a) {
  constexpr double kIdentityTol = 1e-8;
  constexpr double kOrthogonalityTol = 1e-6;
  if (a.grid < 2) throw UsageError("--grid must be >= 2");
  RequireFile(a.model);
  const TreeEnsemble ens = LoadModel(a.model);
  const Dataset train = LoadData(a.train, a.kind);
  if (train.num_features() != ens.num_features()) {
    throw UsageError("train and model feature counts differ");
  }

  json report;
  bool ok = true;

  const ConstraintAudit audit = AuditConstraints(ens);
  report["constraint_audit"] = {{"paths", audit.num_paths}, {"violations", audit.num_violations},
                                {"pass", audit.ok()}};
  ok = ok && audit.ok();

  TermStore parsed;
  try {
    parsed = ParseEnsemble(ens);
  } catch (const StructureError& e) {
    report["parse_identity"] = {{"pass", false}, {"error", e.what()}};
    report["pass"] = false;
    std::cout << report.dump() << '\n';
    return kAuditFailed;
  }
  const TermStore purified = RunStage("purify", [&] { return Purify(parsed, train); });

  // Identity at random points over the train range.
  Rng rng(a.seed);
  std::vector<double> x(train.num_features());
  double max_parse = 0.0, max_purified = 0.0;
  for (std::size_t s = 0; s < a.lines; ++s) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = rng.Uniform(purified.domain[j].lo, purified.domain[j].hi);
    const double truth = PredictEnsemble(ens, x);
    max_parse = std::max({max_parse, std::abs(parsed.Predict(x) - truth), std::abs(parsed.SumOfTerms(x) - truth)});
    max_purified =
        std::max({max_purified, std::abs(purified.Predict(x) - truth), std::abs(purified.SumOfTerms(x) - truth)});
  }
  const bool identity_ok = max_parse <= kIdentityTol && max_purified <= kIdentityTol;
  report["parse_identity"] = {{"points", a.lines},
                              {"max_abs_error_parsed", max_parse},
                              {"max_abs_error_purified", max_purified},
                              {"pass", identity_ok}};
  ok = ok && identity_ok;

  const SweepOptions sweep{a.lines, a.grid, a.seed};
  const auto& monotone = ens.constraints.monotone();
  const MonotoneReport ens_sweep = CheckMonotone(
      [&ens](std::span<const double> v) { return PredictEnsemble(ens, v); }, monotone, purified.domain, sweep);
  const MonotoneReport store_sweep = CheckMonotoneFull(purified, monotone, sweep);
  json examples = json::array();
  for (const auto& v : ens_sweep.examples) {
    examples.push_back({{"feature", v.feature}, {"from", v.x_before}, {"to", v.x_after}, {"drop", v.drop}});
  }
  report["monotone"] = {{"lines", ens_sweep.lines_checked},
                        {"grid", a.grid},
                        {"violations", ens_sweep.num_violations + store_sweep.num_violations},
                        {"ensemble_violations", ens_sweep.num_violations},
                        {"terms_violations", store_sweep.num_violations},
                        {"examples", examples},
                        {"pass", ens_sweep.ok() && store_sweep.ok()}};
  ok = ok && ens_sweep.ok() && store_sweep.ok();

  json norms = json::array();
  bool orth_ok = true;
  for (const auto& n : OrthogonalityAudit(purified, train)) {
    norms.push_back({{"j", n.j}, {"k", n.k}, {"norm", n.norm}});
    orth_ok = orth_ok && n.norm <= kOrthogonalityTol;
  }
  report["orthogonality"] = {{"norms", norms}, {"tolerance", kOrthogonalityTol}, {"pass", orth_ok}};
  ok = ok && orth_ok;

  report["pass"] = ok;
  std::cout << report.dump() << '\n';
  return ok ? kOk : kAuditFailed;
}

int CmdReport(const ModelDataArgs& a) {
  RequireFile(a.model);
  const TreeEnsemble ens = LoadModel(a.model);
  const Dataset train = LoadData(a.train, a.kind);
  const TermStore terms = PurifiedTerms(ens, train);
  json metrics;
  metrics[a.train] = MetricsJson(EvaluateMetrics(ens, train));
  for (const auto& path : a.data) {
    const Dataset ds = LoadData(path, a.kind);
    if (ds.num_features() != ens.num_features()) throw UsageError("'" + path + "' has the wrong width");
    metrics[path] = MetricsJson(RunStage("evaluate", [&] { return EvaluateMetrics(ens, ds); }));
  }
  const json out = {{"loss", ToString(ens.loss)},
                    {"num_trees", ens.trees.size()},
                    {"intercept", terms.intercept},
                    {"importances", ImportancesJson(TermImportances(terms, train), train.feature_names())},
                    {"metrics", metrics}};
  std::cout << out.dump() << '\n';
  return kOk;
}

}  // namespace
}  // namespace monogami

int main(int argc, char** argv) {
  using namespace monogami;
  CLI::App app{"Monotone GAM-plus-interaction boosted trees with functional ANOVA export"};
  app.require_subcommand(1);
  app.allow_extras(false);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a simulation dataset split 50/25/25");
  simulate->add_option("--model", sim.model, "first | second")->check(CLI::IsMember({"first", "second"}));
  simulate->add_option("--n", sim.n, "Number of observations");
  simulate->add_option("--sigma", sim.sigma, "Noise standard deviation (continuous)");
  simulate->add_option("--kind", sim.kind, "continuous | binary")->check(CLI::IsMember({"continuous", "binary"}));
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--out", sim.out, "Output directory")->required();

  FilterArgs filt;
  auto* filter = app.add_subcommand("filter", "Rank feature pairs by FAST interaction score");
  filter->add_option("--train", filt.train)->required();
  filter->add_option("--valid", filt.valid)->required();
  filter->add_option("--k", filt.k, "Pairs to report (default: all)");
  filter->add_option("--bins", filt.bins, "Quantile bins per feature")->check(CLI::Range(2, 65536));
  filter->add_option("--kind", filt.kind)->check(CLI::IsMember({"auto", "continuous", "binary"}));

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Filter, tune, fit, parse and purify");
  fit->add_option("--train", fa.train)->required();
  fit->add_option("--valid", fa.valid)->required();
  fit->add_option("--test", fa.test)->required();
  fit->add_option("--k", fa.k, "Number of interaction pairs")->required();
  fit->add_option("--monotone", fa.monotone, "Comma list of +, - or 0 per feature")->required();
  fit->add_option("--out", fa.out, "Output directory")->required();
  fit->add_option("--grid", fa.grid, "Hyperparameter grid JSON");
  fit->add_option("--seed", fa.seed);
  fit->add_option("--threads", fa.threads, "Grid-search worker threads");
  fit->add_option("--bins", fa.bins, "Filter bins per feature")->check(CLI::Range(2, 65536));
  fit->add_option("--kind", fa.kind)->check(CLI::IsMember({"auto", "continuous", "binary"}));

  ModelDataArgs ex;
  auto* export_terms = app.add_subcommand("export-terms", "Write term grids and manifest for a model");
  export_terms->add_option("--model", ex.model)->required();
  export_terms->add_option("--train", ex.train)->required();
  export_terms->add_option("--out", ex.out)->required();
  export_terms->add_option("--kind", ex.kind)->check(CLI::IsMember({"auto", "continuous", "binary"}));

  ModelDataArgs ver;
  auto* verify = app.add_subcommand("verify", "Audit a model: identity, monotonicity, constraints, orthogonality");
  verify->add_option("--model", ver.model)->required();
  verify->add_option("--train", ver.train)->required();
  verify->add_option("--lines", ver.lines, "Random anchor lines per monotone feature");
  verify->add_option("--grid", ver.grid, "Grid points per line");
  verify->add_option("--seed", ver.seed);
  verify->add_option("--kind", ver.kind)->check(CLI::IsMember({"auto", "continuous", "binary"}));

  ModelDataArgs rep;
  auto* report = app.add_subcommand("report", "Print term importances and metrics");
  report->add_option("--model", rep.model)->required();
  report->add_option("--train", rep.train)->required();
  report->add_option("--data", rep.data, "Extra CSV files to score");
  report->add_option("--kind", rep.kind)->check(CLI::IsMember({"auto", "continuous", "binary"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*simulate) return CmdSimulate(sim);
    if (*filter) return CmdFilter(filt);
    if (*fit) return CmdFit(fa);
    if (*export_terms) return CmdExportTerms(ex);
    if (*verify) return CmdVerify(ver);
    if (*report) return CmdReport(rep);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const PipelineError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPipeline;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPipeline;
  }
  return kUsage;
}
