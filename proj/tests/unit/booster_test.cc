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

#include <algorithm>
#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "monogami/anova.h"
#include "monogami/booster.h"
#include "monogami/errors.h"
#include "monogami/pipeline.h"
#include "unit/test_util.h"

namespace monogami {
namespace {

using testing::SharedAxisSets;
using testing::SharedAxisTree;
using testing::Leaf;
using testing::Split;
using testing::TempDir;

Dataset Uniform4(std::size_t n, std::uint64_t seed, double (*f)(std::span<const double>),
                 double noise) {
  Rng rng(seed);
  std::vector<std::vector<double>> cols(4, std::vector<double>(n));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x[4];
    for (int j = 0; j < 4; ++j) cols[j][i] = x[j] = rng.Uniform(-1, 1);
    y[i] = f(std::span<const double>(x, 4)) + noise * rng.Normal();
  }
  return Dataset(std::move(cols), std::move(y), ResponseKind::kContinuous);
}

double Wiggly(std::span<const double> x) {
  return std::sin(4 * x[0]) + x[1] * x[3] - x[2] * x[2] + x[0] * x[1] + 0.5 * x[3];
}

TEST(LossTest, GradHessExamples) {
  const auto sq = LossGradHess(LossKind::kSquared, 3.0, 3.0);
  EXPECT_EQ(sq.grad, 0.0);
  EXPECT_EQ(sq.hess, 1.0);
  const auto pos = LossGradHess(LossKind::kLogistic, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(pos.grad, -0.5);
  EXPECT_DOUBLE_EQ(pos.hess, 0.25);
  const auto neg = LossGradHess(LossKind::kLogistic, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(neg.grad, 0.5);
  EXPECT_DOUBLE_EQ(neg.hess, 0.25);
}

TEST(LossTest, MatchesCentralDifferences) {
  const double step = 1e-5;
  for (LossKind loss : {LossKind::kSquared, LossKind::kLogistic}) {
    for (double y : {0.0, 1.0}) {
      for (double pred : {-3.0, -1.2, -0.4, 0.3, 0.9, 2.5}) {
        const auto gh = LossGradHess(loss, y, pred);
        const double g_fd =
            (LossValue(loss, y, pred + step) - LossValue(loss, y, pred - step)) / (2 * step);
        const double h_fd = (LossGradHess(loss, y, pred + step).grad -
                             LossGradHess(loss, y, pred - step).grad) /
                            (2 * step);
        EXPECT_LE(std::abs(g_fd - gh.grad), 1e-6 * std::abs(gh.grad)) << pred;
        EXPECT_LE(std::abs(h_fd - gh.hess), 1e-6 * std::abs(gh.hess)) << pred;
        EXPECT_GE(gh.hess, 0.0);
      }
    }
  }
}

TEST(LossTest, LogisticIsStableAtExtremes) {
  EXPECT_TRUE(std::isfinite(LossValue(LossKind::kLogistic, 0.0, 800.0)));
  EXPECT_NEAR(LossValue(LossKind::kLogistic, 1.0, -800.0), 800.0, 1e-9);
  EXPECT_EQ(Sigmoid(-800.0), 0.0);
  EXPECT_EQ(Sigmoid(800.0), 1.0);
}

TEST(ConstraintTest, AllowedSplitFeatures) {
  const auto sets = SharedAxisSets();
  EXPECT_EQ(AllowedSplitFeatures({1}, sets), (FeatureSet{0, 1, 3}));
  EXPECT_EQ(AllowedSplitFeatures({0, 1}, sets), (FeatureSet{0, 1}));
  EXPECT_EQ(AllowedSplitFeatures({1, 3}, sets), (FeatureSet{1, 3}));
  EXPECT_EQ(AllowedSplitFeatures({}, sets), (FeatureSet{0, 1, 3}));
  EXPECT_EQ(AllowedSplitFeatures({0}, sets), (FeatureSet{0, 1}));
  EXPECT_TRUE(AllowedSplitFeatures({0, 3}, sets).empty());
}

TEST(ConstraintTest, ValidatesSets) {
  EXPECT_THROW(ConstraintSpec::FromSets({0, 0}, {{0}}), ConfigError);          // no {1}
  EXPECT_THROW(ConstraintSpec::FromSets({0, 0}, {{0}, {1}, {0, 2}}), ConfigError);
  EXPECT_THROW(ConstraintSpec::FromSets({0, 0, 0}, {{0}, {1}, {2}, {0, 1, 2}}), ConfigError);
  EXPECT_THROW(ConstraintSpec::Make({0, 2}, {}), ConfigError);
  const auto spec = ConstraintSpec::Make({1, 0, -1}, std::vector<std::pair<std::size_t, std::size_t>>{{0, 2}});
  EXPECT_EQ(spec.interaction_sets(), (std::vector<FeatureSet>{{0}, {1}, {2}, {0, 2}}));
  EXPECT_EQ(spec.pairs(), (std::vector<std::pair<std::size_t, std::size_t>>{{0, 2}}));
}

TEST(PredictTest, SharedAxisRouting) {
  TreeEnsemble ens;
  ens.constraints = ConstraintSpec::FromSets({0, 0, 0, 0}, {{0}, {1}, {2}, {3}, {0, 1}, {1, 3}});
  ens.trees.push_back(SharedAxisTree(3.0, 4.0, 5.0, 6.0));
  EXPECT_EQ(PredictEnsemble(ens, std::vector<double>{9, -1, 9, -1}), 3.0);
  EXPECT_EQ(PredictEnsemble(ens, std::vector<double>{9, -1, 9, 1}), 4.0);
  EXPECT_EQ(PredictEnsemble(ens, std::vector<double>{-1, 1, 9, 9}), 5.0);
  EXPECT_EQ(PredictEnsemble(ens, std::vector<double>{1, 1, 9, 9}), 6.0);
}

TEST(PredictTest, EmptyEnsembleIsBaseScore) {
  TreeEnsemble ens;
  ens.base_score = 1.25;
  ens.constraints = ConstraintSpec::Make({0}, {});
  EXPECT_EQ(PredictEnsemble(ens, std::vector<double>{3.0}), 1.25);
}

TEST(PredictTest, ThresholdRoutesLeft) {
  TreeEnsemble ens;
  ens.constraints = ConstraintSpec::Make({0}, {});
  Tree t;
  t.nodes = {Split(0, 0.5, 1, 2), Leaf(-1.0), Leaf(1.0)};
  ens.trees.push_back(t);
  EXPECT_EQ(PredictEnsemble(ens, std::vector<double>{0.5}), -1.0);
  EXPECT_EQ(PredictEnsemble(ens, std::vector<double>{std::nextafter(0.5, 1.0)}), 1.0);
}

TEST(GrowTest, IncreasingStepGivesOrderedStump) {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i);
    y.push_back(i < 10 ? 0.0 : 5.0);
  }
  const Dataset ds({x}, y, ResponseKind::kContinuous);
  std::vector<double> g(20), h(20, 1.0);
  for (int i = 0; i < 20; ++i) g[i] = -y[i];
  BoostConfig cfg;
  cfg.max_depth = 1;
  const Tree t = GrowTree(ds, g, h, ConstraintSpec::Make({1}, {}), cfg);
  ASSERT_EQ(t.nodes.size(), 3u);
  EXPECT_EQ(t.nodes[0].threshold, 9.5);
  EXPECT_LE(t.nodes[t.nodes[0].left].value, t.nodes[t.nodes[0].right].value);
}

TEST(GrowTest, DecreasingDataRejectedUnderIncreasingConstraint) {
  // y = -x on 8 points with g = -y, h = 1. Every one of the 7 candidate
  // splits has w_L = -sum_L(y)/(n_L+1) > w_R, so all are rejected.
  std::vector<double> x, y, g, h(8, 1.0);
  for (int i = 1; i <= 8; ++i) {
    x.push_back(i);
    y.push_back(-i);
    g.push_back(i);
  }
  for (int cut = 1; cut < 8; ++cut) {
    double gl = 0, gr = 0;
    for (int i = 0; i < 8; ++i) (i < cut ? gl : gr) += g[i];
    ASSERT_GT(-gl / (cut + 1.0), -gr / (8 - cut + 1.0));
  }
  const Dataset ds({x}, y, ResponseKind::kContinuous);
  BoostConfig cfg;
  cfg.max_depth = 1;
  cfg.gamma = 0.0;
  cfg.learning_rate = 0.5;
  const Tree t = GrowTree(ds, g, h, ConstraintSpec::Make({1}, {}), cfg);
  ASSERT_EQ(t.nodes.size(), 1u);
  // Global weight -G/(H + 1) = -36/9.
  EXPECT_EQ(t.nodes[0].value, -2.0);

  // Without the constraint the same data splits.
  const Tree free = GrowTree(ds, g, h, ConstraintSpec::Make({0}, {}), cfg);
  EXPECT_EQ(free.nodes.size(), 3u);
}

TEST(GrowTest, UnconstrainedLeavesAreNewtonOptimal) {
  const Dataset ds = Uniform4(400, 5, &Wiggly, 0.3);
  std::vector<double> g(400), h(400);
  Rng rng(9);
  for (std::size_t i = 0; i < 400; ++i) {
    g[i] = -ds.response()[i];
    h[i] = 0.5 + rng.Uniform();
  }
  BoostConfig cfg;
  cfg.max_depth = 2;
  cfg.learning_rate = 0.3;
  cfg.reg_lambda = 2.0;
  const auto spec = ConstraintSpec::Make({0, 0, 0, 0}, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 3}});
  std::vector<int> leaf_of_row;
  const Tree t = GrowTree(ds, SortedColumns(ds), g, h, spec, cfg, &leaf_of_row);
  ASSERT_GT(t.num_leaves(), 1u);
  for (std::size_t node = 0; node < t.nodes.size(); ++node) {
    if (!t.nodes[node].is_leaf()) continue;
    double gs = 0, hs = 0;
    for (std::size_t i = 0; i < 400; ++i) {
      if (leaf_of_row[i] == static_cast<int>(node)) {
        gs += g[i];
        hs += h[i];
      }
      ASSERT_EQ(leaf_of_row[i], t.Leaf(ds.Row(i)));
    }
    EXPECT_NEAR(t.nodes[node].value / cfg.learning_rate, -gs / (hs + cfg.reg_lambda),
                kValueQuantum / cfg.learning_rate);
  }
}

TEST(GrowTest, EmptyDataGivesZeroLeaf) {
  const Dataset full({{1.0, 2.0}}, {1.0, 2.0}, ResponseKind::kContinuous);
  const Dataset empty = full.Subset(std::vector<std::size_t>{});
  const Tree t = GrowTree(empty, {}, {}, ConstraintSpec::Make({0}, {}), BoostConfig{});
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].value, 0.0);
}

TEST(GrowTest, RejectsNegativeHessian) {
  const Dataset ds({{1.0, 2.0}}, {1.0, 2.0}, ResponseKind::kContinuous);
  EXPECT_THROW(GrowTree(ds, std::vector<double>{0, 0}, std::vector<double>{1, -1},
                        ConstraintSpec::Make({0}, {}), BoostConfig{}),
               ConfigError);
}

TEST(FitTest, DepthThreeRespectsSharedAxisSets) {
  const Dataset ds = Uniform4(1500, 21, &Wiggly, 0.2);
  const auto spec = ConstraintSpec::FromSets({0, 0, 0, 0}, {{0}, {1}, {2}, {3}, {0, 1}, {1, 3}});
  BoostConfig cfg;
  cfg.n_trees = 40;
  cfg.max_depth = 3;
  cfg.learning_rate = 0.3;
  const TreeEnsemble ens = FitBoosted(ds, nullptr, spec, cfg);
  const auto audit = AuditConstraints(ens);
  EXPECT_TRUE(audit.ok());
  bool saw_01 = false, saw_13 = false;
  for (const Tree& t : ens.trees) {
    for (const FeatureSet& path : LeafPathFeatures(t)) {
      const bool has013 = std::count(path.begin(), path.end(), 0) &&
                          std::count(path.begin(), path.end(), 1) &&
                          std::count(path.begin(), path.end(), 3);
      ASSERT_FALSE(has013);
      ASSERT_LE(path.size(), 2u);
      saw_01 |= path == FeatureSet{0, 1};
      saw_13 |= path == FeatureSet{1, 3};
    }
  }
  EXPECT_TRUE(saw_01);
  EXPECT_TRUE(saw_13);
}

TEST(FitTest, MonotoneSweepIsExact) {
  const Dataset ds = Uniform4(2000, 8, &Wiggly, 0.5);
  const std::vector<int> mono = {1, -1, 1, -1};
  const auto spec = ConstraintSpec::Make(mono, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 3}});
  BoostConfig cfg;
  cfg.n_trees = 150;
  cfg.max_depth = 2;
  cfg.learning_rate = 0.2;
  const TreeEnsemble ens = FitBoosted(ds, nullptr, spec, cfg);
  for (const Tree& t : ens.trees) {
    for (const TreeNode& n : t.nodes) {
      if (n.is_leaf()) {
        ASSERT_TRUE(n.value / cfg.learning_rate >= n.lower - 1e-9 &&
                    n.value / cfg.learning_rate <= n.upper + 1e-9);
      }
    }
  }
  const std::vector<FeatureDomain> dom(4, FeatureDomain{-1.2, 1.2});
  const auto report = CheckMonotone(
      [&](std::span<const double> x) { return PredictEnsemble(ens, x); }, mono, dom,
      SweepOptions{.n_lines = 1000, .n_grid = 50, .seed = 4});
  EXPECT_EQ(report.lines_checked, 4000u);
  EXPECT_EQ(report.num_violations, 0u);
}

TEST(FitTest, ConstantResponse) {
  const Dataset ds({{1, 2, 3, 4, 5, 6}}, std::vector<double>(6, 2.5), ResponseKind::kContinuous);
  BoostConfig cfg;
  cfg.n_trees = 5;
  const TreeEnsemble ens = FitBoosted(ds, nullptr, ConstraintSpec::Make({0}, {}), cfg);
  EXPECT_EQ(ens.base_score, 2.5);
  for (const Tree& t : ens.trees) {
    ASSERT_EQ(t.nodes.size(), 1u);
    EXPECT_EQ(t.nodes[0].value, 0.0);
  }
}

TEST(FitTest, LogisticWithoutSignal) {
  Rng rng(31);
  const std::size_t n = 4000;
  std::vector<std::vector<double>> cols(2, std::vector<double>(n));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    cols[0][i] = rng.Uniform(-1, 1);
    cols[1][i] = rng.Uniform(-1, 1);
    y[i] = i % 2 == 0 ? 1.0 : 0.0;
  }
  const Dataset all(cols, y, ResponseKind::kBinary);
  std::vector<std::size_t> tr, va;
  for (std::size_t i = 0; i < n; ++i) (i < n / 2 ? tr : va).push_back(i);
  const Dataset train = all.Subset(tr), valid = all.Subset(va);
  BoostConfig cfg;
  cfg.n_trees = 200;
  cfg.early_stopping_rounds = 20;
  const TreeEnsemble ens = FitBoosted(train, &valid, ConstraintSpec::Make({0, 0}, {}), cfg);
  EXPECT_NEAR(ens.base_score, 0.0, 1e-12);
  EXPECT_NEAR(Auc(valid.response(), PredictEnsemble(ens, valid)), 0.5, 0.05);
}

TEST(FitTest, EarlyStoppingNeedsValidation) {
  const Dataset ds({{1.0, 2.0}}, {1.0, 2.0}, ResponseKind::kContinuous);
  BoostConfig cfg;
  cfg.early_stopping_rounds = 5;
  EXPECT_THROW(FitBoosted(ds, nullptr, ConstraintSpec::Make({0}, {}), cfg), ConfigError);
}

TEST(FitTest, EarlyStoppingTruncatesAtBest) {
  const Dataset train = Uniform4(600, 1, &Wiggly, 1.0);
  const Dataset valid = Uniform4(300, 2, &Wiggly, 1.0);
  BoostConfig cfg;
  cfg.n_trees = 500;
  cfg.learning_rate = 0.3;
  cfg.early_stopping_rounds = 10;
  FitTrace trace;
  const auto spec = ConstraintSpec::Make({0, 0, 0, 0}, {});
  const TreeEnsemble ens = FitBoosted(train, &valid, spec, cfg, &trace);
  ASSERT_LT(ens.trees.size(), 500u);
  EXPECT_EQ(ens.trees.size(), trace.best_num_trees);
  EXPECT_EQ(MeanLoss(LossKind::kSquared, valid.response(), PredictEnsemble(ens, valid)),
            trace.best_valid_loss);
  EXPECT_EQ(trace.valid_loss.size(), trace.best_num_trees + 10);
}

TEST(FitTest, Deterministic) {
  const Dataset ds = Uniform4(800, 3, &Wiggly, 0.5);
  const auto spec = ConstraintSpec::Make({1, 0, 0, 0}, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
  BoostConfig cfg;
  cfg.n_trees = 30;
  EXPECT_EQ(ModelToJson(FitBoosted(ds, nullptr, spec, cfg)),
            ModelToJson(FitBoosted(ds, nullptr, spec, cfg)));
}

TEST(ModelIoTest, RoundTripIsBitExact) {
  TempDir dir;
  const Dataset ds = Uniform4(800, 4, &Wiggly, 0.5);
  const auto spec = ConstraintSpec::Make({1, -1, 0, 1}, std::vector<std::pair<std::size_t, std::size_t>>{{1, 3}});
  BoostConfig cfg;
  cfg.n_trees = 25;
  const TreeEnsemble ens = FitBoosted(ds, nullptr, spec, cfg);
  SaveModel(ens, dir.path() / "m.json");
  const TreeEnsemble back = LoadModel(dir.path() / "m.json");
  EXPECT_EQ(back.constraints.monotone(), spec.monotone());
  EXPECT_EQ(back.constraints.interaction_sets(), spec.interaction_sets());
  EXPECT_EQ(ModelToJson(back), ModelToJson(ens));
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    ASSERT_EQ(PredictEnsemble(back, ds.Row(i)), PredictEnsemble(ens, ds.Row(i)));
  }
}

TEST(ModelIoTest, MalformedModelsThrowIoError) {
  TreeEnsemble ens;
  ens.constraints = ConstraintSpec::Make({0, 0}, {});
  ens.trees.push_back(Tree{{Split(0, 0.5, 1, 2), Leaf(1.0), Leaf(2.0)}});
  const std::string good = ModelToJson(ens);
  EXPECT_NO_THROW(ModelFromJson(good));
  EXPECT_THROW(ModelFromJson(good.substr(0, good.size() / 2)), IoError);
  EXPECT_THROW(ModelFromJson("{}"), IoError);
  std::string bad_feature = good;
  bad_feature.replace(bad_feature.find("\"feature\":0"), 11, "\"feature\":7");
  EXPECT_THROW(ModelFromJson(bad_feature), IoError);
  std::string cycle = good;
  cycle.replace(cycle.find("\"left\":1"), 8, "\"left\":0");
  EXPECT_THROW(ModelFromJson(cycle), IoError);
  EXPECT_THROW(LoadModel("/nonexistent/model.json"), IoError);
}

}  // namespace
}  // namespace monogami
