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

#ifndef MONOGAMI_PIPELINE_H_
#define MONOGAMI_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "monogami/anova.h"
#include "monogami/booster.h"
#include "monogami/dataset.h"
#include "monogami/filter.h"

namespace monogami {

// Candidate values for the tuned boosting hyperparameters. Every list must
// be non-empty. max_depth is replaced by 1 when no interactions are
// selected.
struct HyperGrid {
  std::vector<std::size_t> n_trees = {2000};
  std::vector<int> max_depth = {2};
  std::vector<double> learning_rate = {0.03, 0.1};
  std::vector<double> reg_lambda = {0.0, 1.0};
  std::vector<double> min_child_hessian = {1.0, 10.0};
  double gamma = 0.0;
  std::size_t early_stopping_rounds = 50;

  void Validate() const;
  // Cartesian product in nesting order n_trees, max_depth, learning_rate,
  // reg_lambda, min_child_hessian (last varies fastest).
  std::vector<BoostConfig> Expand(std::uint64_t seed) const;
};

struct PipelineConfig {
  std::size_t num_pairs = 0;  // K
  HyperGrid grid;
  std::vector<int> monotone;  // empty: unconstrained
  std::size_t filter_bins = 32;
  // Boosting settings of the main-effects model used for pair filtering.
  BoostConfig gam = {.n_trees = 1000,
                     .max_depth = 1,
                     .learning_rate = 0.1,
                     .reg_lambda = 1.0,
                     .gamma = 0.0,
                     .min_child_hessian = 1.0,
                     .early_stopping_rounds = 50,
                     .seed = 0};
  PurifyOptions purify;
  std::uint64_t seed = 0;
  // Parallel grid-search workers; results do not depend on it.
  std::size_t threads = 1;

  void Validate(std::size_t num_features) const;
};

struct Metrics {
  ResponseKind kind = ResponseKind::kContinuous;
  double rmse = 0.0;     // continuous: response-space RMSE
  double auc = 0.0;      // binary
  double logloss = 0.0;  // binary
  // The headline number: RMSE or AUC.
  double primary() const { return kind == ResponseKind::kBinary ? auc : rmse; }
};

double Rmse(std::span<const double> y, std::span<const double> pred);
// Mann-Whitney AUC with half credit for tied scores. Throws
// UndefinedMetricError unless both classes are present.
double Auc(std::span<const double> y, std::span<const double> score);
// Metrics from link-space scores.
Metrics EvaluateScores(const Dataset& ds, std::span<const double> link_scores);
Metrics EvaluateMetrics(const TreeEnsemble& ens, const Dataset& ds);
Metrics EvaluateMetrics(const TermStore& store, const Dataset& ds);

struct GridResult {
  BoostConfig config;
  std::size_t num_trees = 0;
  double valid_loss = 0.0;
};

struct FittedGami {
  TermStore terms;
  TreeEnsemble ensemble;
  std::vector<PairScore> selected_pairs;
  BoostConfig chosen;
  std::vector<GridResult> grid_results;
  Metrics train, valid, test;
  std::vector<TermImportance> importances;
};

// Filter, tune, fit, parse, purify and evaluate.
FittedGami RunPipeline(const Dataset& train, const Dataset& valid, const Dataset& test,
                       const PipelineConfig& cfg);

// Pair filtering alone: initial GAM, residuals and FAST ranking of the top pairs.
std::vector<PairScore> SelectPairs(const Dataset& train, const Dataset& valid,
                                   const PipelineConfig& cfg, std::size_t num_pairs);

// Tunes over cfg.grid with a fixed constraint spec, returning the winner.
TreeEnsemble TuneBoosted(const Dataset& train, const Dataset& valid, const ConstraintSpec& spec,
                         const PipelineConfig& cfg, BoostConfig* chosen,
                         std::vector<GridResult>* results);

}  // namespace monogami

#endif  // MONOGAMI_PIPELINE_H_
