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

#ifndef MONOGAMI_BOOSTER_H_
#define MONOGAMI_BOOSTER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "monogami/dataset.h"

namespace monogami {

enum class LossKind { kSquared, kLogistic };

const char* ToString(LossKind kind);
LossKind LossKindFromString(const std::string& name);
LossKind LossFor(ResponseKind kind);

using FeatureSet = std::vector<std::size_t>;  // sorted, unique

// Monotone directions plus the family of allowed split-feature sets.
class ConstraintSpec {
 public:
  ConstraintSpec() = default;
  // Builds all singletons {j} plus the given pairs. Throws ConfigError when
  // a direction is outside {-1, 0, +1}, a pair index is >= p, or a pair has
  // equal elements.
  static ConstraintSpec Make(std::vector<int> monotone,
                             std::span<const std::pair<std::size_t, std::size_t>> pairs);
  // Validates an explicit family: every set of size 1 or 2, indices < p, a
  // singleton for every feature.
  static ConstraintSpec FromSets(std::vector<int> monotone, std::vector<FeatureSet> sets);

  std::size_t num_features() const { return monotone_.size(); }
  int monotone(std::size_t feature) const { return monotone_[feature]; }
  const std::vector<int>& monotone() const { return monotone_; }
  const std::vector<FeatureSet>& interaction_sets() const { return sets_; }
  // Non-singleton sets as (j, k), j < k, in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs() const;

 private:
  std::vector<int> monotone_;
  std::vector<FeatureSet> sets_;
};

// Every feature f such that path ∪ {f} is a subset of at least one set in
// `sets`. The result is sorted. With an empty path this is every feature
// that appears in any set.
FeatureSet AllowedSplitFeatures(const FeatureSet& path_features,
                                std::span<const FeatureSet> sets);

// Flat binary tree. Node 0 is the root. Routing: x[feature] <= threshold goes
// left. Leaf values already include the learning rate.
struct TreeNode {
  static constexpr int kLeaf = -1;

  int feature = kLeaf;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  // Bounds in force while the node was grown (monotone constraints); not
  // serialized.
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool is_leaf() const { return feature == kLeaf; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  int Leaf(std::span<const double> x) const;
  double Predict(std::span<const double> x) const { return nodes[Leaf(x)].value; }
  std::size_t num_leaves() const;
  int depth() const;
};

struct TreeEnsemble {
  double base_score = 0.0;
  LossKind loss = LossKind::kSquared;
  double learning_rate = 0.1;
  ConstraintSpec constraints;
  std::vector<Tree> trees;

  std::size_t num_features() const { return constraints.num_features(); }
};

// Link-space score: base_score + sum of routed leaf values, summed in tree
// order.
double PredictEnsemble(const TreeEnsemble& ens, std::span<const double> x);
std::vector<double> PredictEnsemble(const TreeEnsemble& ens, const Dataset& ds);

// Leaf values are snapped to multiples of this quantum. Every partial sum of
// snapped values is then exact in double precision (for models whose
// predictions stay below 2^20 in magnitude), so any grouping of the leaves,
// such as the term decomposition, reproduces the ensemble bit for bit.
inline constexpr double kValueQuantum = 0x1.0p-32;
double SnapToQuantum(double v);

struct BoostConfig {
  std::size_t n_trees = 100;
  int max_depth = 2;
  double learning_rate = 0.1;
  double reg_lambda = 1.0;
  double gamma = 0.0;
  double min_child_hessian = 1.0;
  // 0 disables early stopping.
  std::size_t early_stopping_rounds = 0;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct GradHess {
  double grad;
  double hess;
};

// Derivatives of the minimized loss with respect to the link score.
// Squared: 0.5 (pred - y)^2. Logistic: the negative log-likelihood
// log(1 + e^pred) - y pred.
GradHess LossGradHess(LossKind loss, double y, double pred);
double LossValue(LossKind loss, double y, double pred);
double MeanLoss(LossKind loss, std::span<const double> y, std::span<const double> pred);

double Sigmoid(double z);

// Row orders sorted by each feature, reused across trees.
class SortedColumns {
 public:
  explicit SortedColumns(const Dataset& ds);
  std::span<const std::uint32_t> order(std::size_t feature) const { return orders_[feature]; }

 private:
  std::vector<std::vector<std::uint32_t>> orders_;
};

// Exact greedy Newton tree growth under monotone and interaction constraints.
// `leaf_of_row`, when non-null, receives the final leaf of every training
// row.
Tree GrowTree(const Dataset& data, std::span<const double> grad, std::span<const double> hess,
              const ConstraintSpec& spec, const BoostConfig& cfg);
Tree GrowTree(const Dataset& data, const SortedColumns& sorted, std::span<const double> grad,
              std::span<const double> hess, const ConstraintSpec& spec, const BoostConfig& cfg,
              std::vector<int>* leaf_of_row);

// Sequential boosting with optional early stopping on `valid`; the result
// is truncated at the best validation loss when early stopping is on.
TreeEnsemble FitBoosted(const Dataset& train, const Dataset* valid, const ConstraintSpec& spec,
                        const BoostConfig& cfg);

struct FitTrace {
  std::vector<double> valid_loss;  // after each tree
  std::size_t best_num_trees = 0;
  double best_valid_loss = 0.0;
};
TreeEnsemble FitBoosted(const Dataset& train, const Dataset* valid, const ConstraintSpec& spec,
                        const BoostConfig& cfg, FitTrace* trace);

// Root-to-leaf split-feature sets, one per leaf, in node order.
std::vector<FeatureSet> LeafPathFeatures(const Tree& tree);

struct ConstraintAudit {
  std::size_t num_paths = 0;
  std::size_t num_violations = 0;
  // Whether every leaf path fits inside some allowed set.
  bool ok() const { return num_violations == 0; }
};
ConstraintAudit AuditConstraints(const TreeEnsemble& ens);

// Model JSON. Saving then loading reproduces every double exactly.
std::string ModelToJson(const TreeEnsemble& ens);
TreeEnsemble ModelFromJson(const std::string& text);
void SaveModel(const TreeEnsemble& ens, const std::filesystem::path& path);
TreeEnsemble LoadModel(const std::filesystem::path& path);

}  // namespace monogami

#endif  // MONOGAMI_BOOSTER_H_
