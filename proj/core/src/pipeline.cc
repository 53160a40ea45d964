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

#include "monogami/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "monogami/errors.h"

namespace monogami {

void HyperGrid::Validate() const {
  if (n_trees.empty() || max_depth.empty() || learning_rate.empty() || reg_lambda.empty() ||
      min_child_hessian.empty()) {
    throw ConfigError("every hyperparameter grid list must be non-empty");
  }
}

std::vector<BoostConfig> HyperGrid::Expand(std::uint64_t seed) const {
  Validate();
  std::vector<BoostConfig> out;
  for (std::size_t trees : n_trees) {
    for (int depth : max_depth) {
      for (double lr : learning_rate) {
        for (double lambda : reg_lambda) {
          for (double mch : min_child_hessian) {
            BoostConfig cfg;
            cfg.n_trees = trees;
            cfg.max_depth = depth;
            cfg.learning_rate = lr;
            cfg.reg_lambda = lambda;
            cfg.gamma = gamma;
            cfg.min_child_hessian = mch;
            cfg.early_stopping_rounds = early_stopping_rounds;
            cfg.seed = seed;
            cfg.Validate();
            out.push_back(cfg);
          }
        }
      }
    }
  }
  return out;
}

void PipelineConfig::Validate(std::size_t num_features) const {
  grid.Validate();
  gam.Validate();
  if (!monotone.empty() && monotone.size() != num_features) {
    throw ConfigError("monotone spec has " + std::to_string(monotone.size()) +
                      " entries for " + std::to_string(num_features) + " features");
  }
  const std::size_t available = num_features * (num_features - 1) / 2;
  if (num_pairs > available) {
    throw ConfigError("K = " + std::to_string(num_pairs) + " exceeds the " +
                      std::to_string(available) + " available pairs");
  }
  if (filter_bins < 2) throw ConfigError("filter needs at least 2 bins");
}

// ---------------------------------------------------------------------------
// Metrics

double Rmse(std::span<const double> y, std::span<const double> pred) {
  if (y.empty() || y.size() != pred.size()) throw ConfigError("RMSE: length mismatch");
  double ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) ss += (y[i] - pred[i]) * (y[i] - pred[i]);
  return std::sqrt(ss / static_cast<double>(y.size()));
}

double Auc(std::span<const double> y, std::span<const double> score) {
  if (y.size() != score.size()) throw ConfigError("AUC: length mismatch");
  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&score](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  // Sum of (1-based, tie-averaged) ranks of the positives.
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start;
    while (end < n && score[order[end]] == score[order[start]]) ++end;
    const double avg_rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t i = start; i < end; ++i) {
      if (y[order[i]] == 1.0) {
        rank_sum += avg_rank;
        ++positives;
      }
    }
    start = end;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetricError("AUC needs both classes in the response");
  }
  const double np = static_cast<double>(positives);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(negatives));
}

Metrics EvaluateScores(const Dataset& ds, std::span<const double> link_scores) {
  Metrics m;
  m.kind = ds.response_kind();
  const auto y = ds.response();
  if (m.kind == ResponseKind::kContinuous) {
    m.rmse = Rmse(y, link_scores);
  } else {
    m.auc = Auc(y, link_scores);
    m.logloss = MeanLoss(LossKind::kLogistic, y, link_scores);
  }
  return m;
}

Metrics EvaluateMetrics(const TreeEnsemble& ens, const Dataset& ds) {
  if (LossFor(ds.response_kind()) != ens.loss) {
    throw ConfigError("model loss does not match the dataset's response kind");
  }
  return EvaluateScores(ds, PredictEnsemble(ens, ds));
}

Metrics EvaluateMetrics(const TermStore& store, const Dataset& ds) {
  if (LossFor(ds.response_kind()) != store.loss) {
    throw ConfigError("model loss does not match the dataset's response kind");
  }
  return EvaluateScores(ds, store.Predict(ds));
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

template <typename Fn>
auto Stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

}  // namespace

std::vector<PairScore> SelectPairs(const Dataset& train, const Dataset& valid,
                                   const PipelineConfig& cfg, std::size_t num_pairs) {
  const TreeEnsemble gam = FitInitialGam(train, &valid, cfg.gam);
  const auto resid = Residuals(train, gam);
  const BinnedDataset binned = BinFeatures(train, cfg.filter_bins);
  return FastFilter(resid, binned, num_pairs);
}

TreeEnsemble TuneBoosted(const Dataset& train, const Dataset& valid, const ConstraintSpec& spec,
                         const PipelineConfig& cfg, BoostConfig* chosen,
                         std::vector<GridResult>* results) {
  std::vector<BoostConfig> configs = cfg.grid.Expand(cfg.seed);
  if (spec.pairs().empty()) {
    for (auto& c : configs) c.max_depth = 1;
  }
  const std::size_t count = configs.size();
  std::vector<TreeEnsemble> fits(count);
  std::vector<FitTrace> traces(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fits[i] = FitBoosted(train, &valid, spec, configs[i], &traces[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(cfg.threads, 1, count);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Lowest validation loss; ties go to fewer trees, then grid order.
  std::size_t best = 0;
  for (std::size_t i = 1; i < count; ++i) {
    const double li = traces[i].best_valid_loss, lb = traces[best].best_valid_loss;
    if (li < lb || (li == lb && fits[i].trees.size() < fits[best].trees.size())) best = i;
  }
  if (results != nullptr) {
    results->clear();
    for (std::size_t i = 0; i < count; ++i) {
      results->push_back({configs[i], fits[i].trees.size(), traces[i].best_valid_loss});
    }
  }
  if (chosen != nullptr) *chosen = configs[best];
  return std::move(fits[best]);
}

FittedGami RunPipeline(const Dataset& train, const Dataset& valid, const Dataset& test,
                       const PipelineConfig& cfg) {
  const std::size_t p = train.num_features();
  cfg.Validate(p);
  for (const Dataset* ds : {&valid, &test}) {
    if (ds->num_features() != p || ds->response_kind() != train.response_kind()) {
      throw ConfigError("train, valid and test schemas differ");
    }
  }

  FittedGami out;
  if (cfg.num_pairs > 0) {
    out.selected_pairs = Stage("filter", [&] { return SelectPairs(train, valid, cfg, cfg.num_pairs); });
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& ps : out.selected_pairs) pairs.emplace_back(ps.j, ps.k);
  const std::vector<int> monotone = cfg.monotone.empty() ? std::vector<int>(p, 0) : cfg.monotone;
  const ConstraintSpec spec = ConstraintSpec::Make(monotone, pairs);

  out.ensemble = Stage("tune", [&] {
    return TuneBoosted(train, valid, spec, cfg, &out.chosen, &out.grid_results);
  });
  const TermStore parsed = Stage("parse", [&] { return ParseEnsemble(out.ensemble); });
  out.terms = Stage("purify", [&] { return Purify(parsed, train, cfg.purify); });
  Stage("evaluate", [&] {
    out.importances = TermImportances(out.terms, train);
    out.train = EvaluateMetrics(out.ensemble, train);
    out.valid = EvaluateMetrics(out.ensemble, valid);
    out.test = EvaluateMetrics(out.ensemble, test);
    return 0;
  });
  return out;
}

}  // namespace monogami
