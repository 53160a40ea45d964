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

#include "monogami/booster.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "monogami/errors.h"

namespace monogami {

const char* ToString(LossKind kind) {
  return kind == LossKind::kLogistic ? "logistic" : "squared";
}

LossKind LossKindFromString(const std::string& name) {
  if (name == "squared") return LossKind::kSquared;
  if (name == "logistic") return LossKind::kLogistic;
  throw ConfigError("unknown loss '" + name + "'");
}

LossKind LossFor(ResponseKind kind) {
  return kind == ResponseKind::kBinary ? LossKind::kLogistic : LossKind::kSquared;
}

// ---------------------------------------------------------------------------
// Constraints

namespace {

void ValidateMonotone(const std::vector<int>& monotone) {
  if (monotone.empty()) throw ConfigError("constraint spec needs at least one feature");
  for (int d : monotone) {
    if (d < -1 || d > 1) throw ConfigError("monotone direction must be -1, 0 or +1");
  }
}

bool IsSubset(const FeatureSet& small, const FeatureSet& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

ConstraintSpec ConstraintSpec::Make(std::vector<int> monotone,
                                    std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  ValidateMonotone(monotone);
  std::vector<FeatureSet> sets;
  for (std::size_t j = 0; j < monotone.size(); ++j) sets.push_back({j});
  for (auto [a, b] : pairs) {
    if (a == b) throw ConfigError("interaction pair needs two distinct features");
    sets.push_back({std::min(a, b), std::max(a, b)});
  }
  return FromSets(std::move(monotone), std::move(sets));
}

ConstraintSpec ConstraintSpec::FromSets(std::vector<int> monotone, std::vector<FeatureSet> sets) {
  ValidateMonotone(monotone);
  const std::size_t p = monotone.size();
  for (auto& set : sets) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    if (set.empty() || set.size() > 2) {
      throw ConfigError("interaction sets must hold one or two features");
    }
    for (std::size_t f : set) {
      if (f >= p) throw ConfigError("interaction set references feature " + std::to_string(f) +
                                    " but only " + std::to_string(p) + " exist");
    }
  }
  std::sort(sets.begin(), sets.end(), [](const FeatureSet& a, const FeatureSet& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  for (std::size_t j = 0; j < p; ++j) {
    if (std::find(sets.begin(), sets.end(), FeatureSet{j}) == sets.end()) {
      throw ConfigError("missing singleton interaction set for feature " + std::to_string(j));
    }
  }
  ConstraintSpec spec;
  spec.monotone_ = std::move(monotone);
  spec.sets_ = std::move(sets);
  return spec;
}

std::vector<std::pair<std::size_t, std::size_t>> ConstraintSpec::pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& set : sets_) {
    if (set.size() == 2) out.emplace_back(set[0], set[1]);
  }
  return out;
}

FeatureSet AllowedSplitFeatures(const FeatureSet& path_features, std::span<const FeatureSet> sets) {
  FeatureSet out;
  for (const auto& set : sets) {
    if (!IsSubset(path_features, set)) continue;
    out.insert(out.end(), set.begin(), set.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Trees and prediction

int Tree::Leaf(std::span<const double> x) const {
  int id = 0;
  while (!nodes[id].is_leaf()) {
    const TreeNode& node = nodes[id];
    id = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return id;
}

std::size_t Tree::num_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int Tree::depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int best = 0;
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const TreeNode& node = nodes[id];
    best = std::max(best, depth[id]);
    if (!node.is_leaf()) {
      depth[node.left] = depth[id] + 1;
      depth[node.right] = depth[id] + 1;
    }
  }
  return best;
}

double PredictEnsemble(const TreeEnsemble& ens, std::span<const double> x) {
  double score = ens.base_score;
  for (const Tree& tree : ens.trees) score += tree.Predict(x);
  return score;
}

std::vector<double> PredictEnsemble(const TreeEnsemble& ens, const Dataset& ds) {
  std::vector<double> out(ds.num_rows());
  std::vector<double> row(ds.num_features());
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    ds.Row(i, row);
    out[i] = PredictEnsemble(ens, row);
  }
  return out;
}

double SnapToQuantum(double v) { return std::nearbyint(v / kValueQuantum) * kValueQuantum; }

// ---------------------------------------------------------------------------
// Loss

void BoostConfig::Validate() const {
  if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ConfigError("learning_rate must be in (0, 1]");
  }
  if (!(reg_lambda >= 0.0)) throw ConfigError("reg_lambda must be >= 0");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
  if (!(min_child_hessian >= 0.0)) throw ConfigError("min_child_hessian must be >= 0");
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

GradHess LossGradHess(LossKind loss, double y, double pred) {
  if (loss == LossKind::kSquared) return {pred - y, 1.0};
  const double p = Sigmoid(pred);
  return {p - y, p * (1.0 - p)};
}

double LossValue(LossKind loss, double y, double pred) {
  if (loss == LossKind::kSquared) {
    const double r = pred - y;
    return 0.5 * r * r;
  }
  // softplus(pred) - y * pred, stable for large |pred|.
  const double softplus = std::max(pred, 0.0) + std::log1p(std::exp(-std::abs(pred)));
  return softplus - y * pred;
}

double MeanLoss(LossKind loss, std::span<const double> y, std::span<const double> pred) {
  if (y.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total += LossValue(loss, y[i], pred[i]);
  return total / static_cast<double>(y.size());
}

// ---------------------------------------------------------------------------
// Tree growth

SortedColumns::SortedColumns(const Dataset& ds) : orders_(ds.num_features()) {
  for (std::size_t j = 0; j < ds.num_features(); ++j) {
    auto& order = orders_[j];
    order.resize(ds.num_rows());
    std::iota(order.begin(), order.end(), 0u);
    const auto col = ds.column(j);
    std::stable_sort(order.begin(), order.end(),
                     [&col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
  }
}

namespace {

// Minimum loss reduction for a split to be taken; absorbs rounding noise in
// gains of splits that change nothing.
constexpr double kMinGain = 1e-6;

struct GrowState {
  double grad_sum = 0.0;
  double hess_sum = 0.0;
  FeatureSet path;
  std::vector<bool> allowed;  // per feature
  bool active = false;
};

struct SplitCandidate {
  double gain = -std::numeric_limits<double>::infinity();
  int feature = -1;
  double threshold = 0.0;
  double left_grad = 0.0;
  double left_hess = 0.0;
  double left_weight = 0.0;
  double right_weight = 0.0;
};

struct ScanState {
  double grad = 0.0;
  double hess = 0.0;
  double last = 0.0;
  bool seen = false;
};

class Grower {
 public:
  Grower(const Dataset& data, const SortedColumns& sorted, std::span<const double> grad,
         std::span<const double> hess, const ConstraintSpec& spec, const BoostConfig& cfg)
      : data_(data), sorted_(sorted), grad_(grad), hess_(hess), spec_(spec), cfg_(cfg) {}

  Tree Grow(std::vector<int>* leaf_of_row) {
    const std::size_t n = data_.num_rows();
    Tree tree;
    tree.nodes.emplace_back();
    states_.emplace_back();
    for (std::size_t i = 0; i < n; ++i) {
      states_[0].grad_sum += grad_[i];
      states_[0].hess_sum += hess_[i];
    }
    position_.assign(n, 0);

    std::vector<int> frontier = {0};
    for (int depth = 0; depth < cfg_.max_depth && !frontier.empty() && n > 0; ++depth) {
      for (int id : frontier) Activate(id);
      std::vector<SplitCandidate> best(tree.nodes.size());
      for (std::size_t j = 0; j < data_.num_features(); ++j) ScanFeature(tree, j, best);

      std::vector<int> next;
      bool any_split = false;
      for (int id : frontier) {
        states_[id].active = false;
        const SplitCandidate& cand = best[id];
        if (cand.feature < 0 || !(cand.gain > kMinGain)) continue;
        any_split = true;
        Split(tree, id, cand);
        next.push_back(tree.nodes[id].left);
        next.push_back(tree.nodes[id].right);
      }
      if (any_split) Route(tree);
      frontier = std::move(next);
    }

    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      TreeNode& node = tree.nodes[id];
      if (!node.is_leaf()) continue;
      const double w = NodeWeight(states_[id].grad_sum, states_[id].hess_sum, node.lower, node.upper);
      node.value = n == 0 ? 0.0 : SnapToQuantum(w * cfg_.learning_rate);
    }
    if (leaf_of_row != nullptr) leaf_of_row->assign(position_.begin(), position_.end());
    return tree;
  }

 private:
  double Weight(double g, double h) const {
    const double denom = h + cfg_.reg_lambda;
    return denom > 0.0 ? -g / denom : 0.0;
  }

  double NodeWeight(double g, double h, double lower, double upper) const {
    return std::clamp(Weight(g, h), lower, upper);
  }

  // Loss reduction of a leaf with weight w relative to weight 0; equals
  // G^2 / (2 (H + lambda)) at the unconstrained optimum.
  double Score(double g, double h, double w) const {
    return -(g * w + 0.5 * (h + cfg_.reg_lambda) * w * w);
  }

  void Activate(int id) {
    GrowState& st = states_[id];
    const FeatureSet allowed = AllowedSplitFeatures(st.path, spec_.interaction_sets());
    st.allowed.assign(data_.num_features(), false);
    for (std::size_t f : allowed) st.allowed[f] = true;
    st.active = true;
  }

  void ScanFeature(const Tree& tree, std::size_t feature, std::vector<SplitCandidate>& best) {
    const auto col = data_.column(feature);
    std::vector<ScanState> scan(tree.nodes.size());
    for (std::uint32_t row : sorted_.order(feature)) {
      const int id = position_[row];
      const GrowState& st = states_[id];
      if (!st.active || !st.allowed[feature]) continue;
      ScanState& sc = scan[id];
      const double x = col[row];
      if (sc.seen && x > sc.last) {
        Evaluate(tree.nodes[id], st, feature, sc, x, best[id]);
      }
      sc.grad += grad_[row];
      sc.hess += hess_[row];
      sc.last = x;
      sc.seen = true;
    }
  }

  void Evaluate(const TreeNode& node, const GrowState& st, std::size_t feature,
                const ScanState& left, double next_value, SplitCandidate& best) const {
    const double right_grad = st.grad_sum - left.grad;
    const double right_hess = st.hess_sum - left.hess;
    if (left.hess < cfg_.min_child_hessian || right_hess < cfg_.min_child_hessian) return;
    const double wl = NodeWeight(left.grad, left.hess, node.lower, node.upper);
    const double wr = NodeWeight(right_grad, right_hess, node.lower, node.upper);
    const int direction = spec_.monotone(feature);
    if (direction > 0 && wl > wr) return;
    if (direction < 0 && wl < wr) return;
    const double parent_w = NodeWeight(st.grad_sum, st.hess_sum, node.lower, node.upper);
    const double gain = Score(left.grad, left.hess, wl) + Score(right_grad, right_hess, wr) -
                        Score(st.grad_sum, st.hess_sum, parent_w) - cfg_.gamma;
    // Strict comparison keeps the lowest feature, then the lowest threshold.
    if (!(gain > best.gain)) return;
    double threshold = left.last + (next_value - left.last) * 0.5;
    if (!(threshold < next_value)) threshold = left.last;
    best = SplitCandidate{gain,    static_cast<int>(feature), threshold, left.grad, left.hess,
                          wl,      wr};
  }

  void Split(Tree& tree, int id, const SplitCandidate& cand) {
    const int left_id = static_cast<int>(tree.nodes.size());
    const int right_id = left_id + 1;
    TreeNode parent = tree.nodes[id];
    TreeNode left, right;
    left.lower = right.lower = parent.lower;
    left.upper = right.upper = parent.upper;
    const int direction = spec_.monotone(static_cast<std::size_t>(cand.feature));
    if (direction != 0) {
      const double mid = 0.5 * (cand.left_weight + cand.right_weight);
      if (direction > 0) {
        left.upper = mid;
        right.lower = mid;
      } else {
        left.lower = mid;
        right.upper = mid;
      }
    }
    tree.nodes[id].feature = cand.feature;
    tree.nodes[id].threshold = cand.threshold;
    tree.nodes[id].left = left_id;
    tree.nodes[id].right = right_id;
    tree.nodes.push_back(left);
    tree.nodes.push_back(right);

    FeatureSet path = states_[id].path;
    const auto f = static_cast<std::size_t>(cand.feature);
    if (!std::binary_search(path.begin(), path.end(), f)) {
      path.insert(std::upper_bound(path.begin(), path.end(), f), f);
    }
    GrowState ls, rs;
    ls.grad_sum = cand.left_grad;
    ls.hess_sum = cand.left_hess;
    rs.grad_sum = states_[id].grad_sum - cand.left_grad;
    rs.hess_sum = states_[id].hess_sum - cand.left_hess;
    ls.path = path;
    rs.path = std::move(path);
    states_.push_back(std::move(ls));
    states_.push_back(std::move(rs));
  }

  void Route(const Tree& tree) {
    for (std::size_t i = 0; i < position_.size(); ++i) {
      const TreeNode& node = tree.nodes[position_[i]];
      if (node.is_leaf()) continue;
      position_[i] = data_.feature(i, node.feature) <= node.threshold ? node.left : node.right;
    }
  }

  const Dataset& data_;
  const SortedColumns& sorted_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const ConstraintSpec& spec_;
  const BoostConfig& cfg_;
  std::vector<GrowState> states_;
  std::vector<int> position_;
};

}  // namespace

Tree GrowTree(const Dataset& data, const SortedColumns& sorted, std::span<const double> grad,
              std::span<const double> hess, const ConstraintSpec& spec, const BoostConfig& cfg,
              std::vector<int>* leaf_of_row) {
  cfg.Validate();
  if (spec.num_features() != data.num_features()) {
    throw ConfigError("constraint spec has " + std::to_string(spec.num_features()) +
                      " features, data has " + std::to_string(data.num_features()));
  }
  if (grad.size() != data.num_rows() || hess.size() != data.num_rows()) {
    throw ConfigError("gradient/hessian length does not match the data");
  }
  for (double h : hess) {
    if (!(h >= 0.0)) throw ConfigError("hessians must be non-negative");
  }
  Grower grower(data, sorted, grad, hess, spec, cfg);
  return grower.Grow(leaf_of_row);
}

Tree GrowTree(const Dataset& data, std::span<const double> grad, std::span<const double> hess,
              const ConstraintSpec& spec, const BoostConfig& cfg) {
  const SortedColumns sorted(data);
  return GrowTree(data, sorted, grad, hess, spec, cfg, nullptr);
}

// ---------------------------------------------------------------------------
// Boosting

namespace {

// Base margin clipping for the logistic constant model.
constexpr double kProbClip = 1e-6;

double BaseScore(LossKind loss, std::span<const double> y) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  if (loss == LossKind::kSquared) return SnapToQuantum(mean);
  const double p = std::clamp(mean, kProbClip, 1.0 - kProbClip);
  return SnapToQuantum(std::log(p / (1.0 - p)));
}

}  // namespace

TreeEnsemble FitBoosted(const Dataset& train, const Dataset* valid, const ConstraintSpec& spec,
                        const BoostConfig& cfg) {
  return FitBoosted(train, valid, spec, cfg, nullptr);
}

TreeEnsemble FitBoosted(const Dataset& train, const Dataset* valid, const ConstraintSpec& spec,
                        const BoostConfig& cfg, FitTrace* trace) {
  cfg.Validate();
  const bool early_stop = cfg.early_stopping_rounds > 0;
  if (early_stop && (valid == nullptr || valid->num_rows() == 0)) {
    throw ConfigError("early stopping requested without a validation set");
  }
  if (spec.num_features() != train.num_features()) {
    throw ConfigError("constraint spec does not match the training schema");
  }
  if (valid != nullptr && (valid->num_features() != train.num_features() ||
                           valid->response_kind() != train.response_kind())) {
    throw ConfigError("train and valid schemas differ");
  }

  TreeEnsemble ens;
  ens.loss = LossFor(train.response_kind());
  ens.learning_rate = cfg.learning_rate;
  ens.constraints = spec;
  ens.base_score = BaseScore(ens.loss, train.response());

  const std::size_t n = train.num_rows();
  const auto y = train.response();
  std::vector<double> pred(n, ens.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<int> leaf_of_row;
  const SortedColumns sorted(train);

  std::vector<double> valid_rows;
  std::vector<double> valid_pred;
  const std::size_t p = train.num_features();
  if (valid != nullptr) {
    valid_rows.resize(valid->num_rows() * p);
    for (std::size_t i = 0; i < valid->num_rows(); ++i) {
      valid->Row(i, std::span<double>(valid_rows).subspan(i * p, p));
    }
    valid_pred.assign(valid->num_rows(), ens.base_score);
  }
  auto valid_loss = [&] {
    return valid == nullptr ? 0.0 : MeanLoss(ens.loss, valid->response(), valid_pred);
  };

  double best_loss = valid_loss();
  std::size_t best_trees = 0;
  if (trace != nullptr) trace->valid_loss.clear();

  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const GradHess gh = LossGradHess(ens.loss, y[i], pred[i]);
      grad[i] = gh.grad;
      hess[i] = gh.hess;
    }
    Tree tree = GrowTree(train, sorted, grad, hess, spec, cfg, &leaf_of_row);
    for (std::size_t i = 0; i < n; ++i) pred[i] += tree.nodes[leaf_of_row[i]].value;
    for (std::size_t i = 0; i < valid_pred.size(); ++i) {
      valid_pred[i] += tree.Predict(std::span<const double>(valid_rows).subspan(i * p, p));
    }
    ens.trees.push_back(std::move(tree));

    const double loss = valid_loss();
    if (trace != nullptr) trace->valid_loss.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best_trees = ens.trees.size();
    }
    if (early_stop && ens.trees.size() - best_trees >= cfg.early_stopping_rounds) break;
  }
  if (early_stop) {
    ens.trees.resize(best_trees);
  } else {
    best_trees = ens.trees.size();
    best_loss = trace != nullptr && !trace->valid_loss.empty() ? trace->valid_loss.back() : best_loss;
  }
  if (trace != nullptr) {
    trace->best_num_trees = best_trees;
    trace->best_valid_loss = best_loss;
  }
  return ens;
}

// ---------------------------------------------------------------------------
// Structure audit

std::vector<FeatureSet> LeafPathFeatures(const Tree& tree) {
  std::vector<FeatureSet> path(tree.nodes.size());
  std::vector<FeatureSet> out;
  // Children always come after their parent in the flat layout.
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const TreeNode& node = tree.nodes[id];
    if (node.is_leaf()) {
      out.push_back(path[id]);
      continue;
    }
    FeatureSet child = path[id];
    const auto f = static_cast<std::size_t>(node.feature);
    if (!std::binary_search(child.begin(), child.end(), f)) {
      child.insert(std::upper_bound(child.begin(), child.end(), f), f);
    }
    path[node.left] = child;
    path[node.right] = std::move(child);
  }
  return out;
}

ConstraintAudit AuditConstraints(const TreeEnsemble& ens) {
  ConstraintAudit audit;
  const auto& sets = ens.constraints.interaction_sets();
  for (const Tree& tree : ens.trees) {
    for (const FeatureSet& path : LeafPathFeatures(tree)) {
      ++audit.num_paths;
      const bool contained = std::any_of(sets.begin(), sets.end(),
                                         [&path](const FeatureSet& s) { return IsSubset(path, s); });
      if (!contained) ++audit.num_violations;
    }
  }
  return audit;
}

}  // namespace monogami
