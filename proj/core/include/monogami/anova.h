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

#ifndef MONOGAMI_ANOVA_H_
#define MONOGAMI_ANOVA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "monogami/booster.h"
#include "monogami/dataset.h"

namespace monogami {

// Piecewise-constant function of one variable. Interval i is
// (breaks[i-1], breaks[i]], matching the tree routing rule x <= t -> left.
struct StepFunction {
  std::vector<double> breaks;
  std::vector<double> values = {0.0};  // breaks.size() + 1 entries

  std::size_t Interval(double x) const;
  double operator()(double x) const { return values[Interval(x)]; }
};

// Continuous piecewise-linear function in the hat (degree-1 B-spline) basis:
// f(x) = sum_m coefs[m] * hat_m(x), constant beyond the outer knots. An empty
// knot list is the zero function.
struct PiecewiseLinear {
  std::vector<double> knots;
  std::vector<double> coefs;

  bool empty() const { return knots.empty(); }
  double operator()(double x) const;
};

// Hat-basis evaluation: the (at most two) non-zero basis functions at x.
struct HatWeights {
  std::size_t index = 0;  // weight (1 - t) on index, t on index + 1
  double t = 0.0;
};
HatWeights HatBasisAt(std::span<const double> knots, double x);

struct MainEffectTerm {
  std::size_t feature = 0;
  StepFunction step;
  PiecewiseLinear spline;

  double operator()(double x) const { return step(x) + (spline.empty() ? 0.0 : spline(x)); }
};

struct InteractionTerm {
  std::size_t j = 0;
  std::size_t k = 0;
  std::vector<double> x_breaks;  // along feature j
  std::vector<double> y_breaks;  // along feature k
  // Row-major (x_breaks.size() + 1) x (y_breaks.size() + 1).
  std::vector<double> cells = {0.0};
  // Main-effect content removed by purification (the negated g_j, g_k) and
  // the removed constant.
  PiecewiseLinear offset_j;
  PiecewiseLinear offset_k;
  double constant = 0.0;

  double Cell(double xj, double xk) const;
  double operator()(double xj, double xk) const;
};

struct FeatureDomain {
  double lo = -1.0;
  double hi = 1.0;
};

// Functional ANOVA form of a model: intercept + mains + pairwise terms, in
// link space.
struct TermStore {
  double intercept = 0.0;
  LossKind loss = LossKind::kSquared;
  std::vector<MainEffectTerm> mains;          // one per feature, mains[j].feature == j
  std::vector<InteractionTerm> interactions;  // sorted by (j, k)
  std::vector<FeatureDomain> domain;          // per feature, for sweeps and grids

  std::size_t num_features() const { return mains.size(); }
  const InteractionTerm* FindInteraction(std::size_t j, std::size_t k) const;

  // Full model. Spline components of a feature are summed coefficient-wise
  // before evaluation, so purification offsets cancel exactly; for a parsed
  // ensemble this reproduces PredictEnsemble bit for bit.
  double Predict(std::span<const double> x) const;
  std::vector<double> Predict(const Dataset& ds) const;
  // Term-by-term evaluation, sum of individually evaluated terms.
  double SumOfTerms(std::span<const double> x) const;
  // Intercept plus main effects only.
  double PredictMainsOnly(std::span<const double> x) const;
};

// Re-expresses every leaf of every tree as a main-effect step (one split
// feature on its path), an interaction cell block (two features), or an
// intercept shift (root leaf). Throws StructureError on paths with three or
// more distinct features.
TermStore ParseEnsemble(const TreeEnsemble& ens);

struct PurifyOptions {
  std::size_t interior_knots = 20;
  // Added to the normal equations when they are singular.
  double ridge = 1e-8;
};

// Single pass over the interactions in (j, k) order: fit
// y~ = c + g_j(x_j) + g_k(x_k) on train by least squares in a hat basis with
// train-mean-zero g's, move g_j, g_k to the mains and c to the intercept, and
// subtract them from the interaction. Then re-centers every main effect to
// train-mean zero. Predictions are unchanged.
TermStore Purify(TermStore store, const Dataset& train, const PurifyOptions& opts = {});

// Shifts each main effect to train-mean zero, moving the shift into the
// intercept.
void CenterMainEffects(TermStore& store, const Dataset& train);

// Equally spaced knots over [lo, hi] with `interior` knots in between. A
// degenerate range yields one knot.
std::vector<double> UniformKnots(double lo, double hi, std::size_t interior);

// Least-squares fit of y ~ c + g_j + g_k. The g's come back as hat
// coefficients on the given knots with train-mean zero.
struct AdditiveFit {
  double constant = 0.0;
  std::vector<double> coef_j;
  std::vector<double> coef_k;
  bool used_ridge = false;
};
AdditiveFit FitAdditiveSplines(std::span<const double> y, std::span<const double> xj,
                               std::span<const double> xk, std::span<const double> knots_j,
                               std::span<const double> knots_k, double ridge);

struct TermId {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t j = 0;
  std::size_t k = kNone;  // kNone for a main effect

  bool is_main() const { return k == kNone; }
  std::string Label(std::span<const std::string> names) const;
  friend auto operator<=>(const TermId& a, const TermId& b) {
    if (a.j != b.j) return a.j <=> b.j;
    // Main effect of j sorts before its interactions.
    const std::size_t ka = a.is_main() ? 0 : a.k + 1;
    const std::size_t kb = b.is_main() ? 0 : b.k + 1;
    return ka <=> kb;
  }
  friend bool operator==(const TermId&, const TermId&) = default;
};

struct TermImportance {
  TermId term;
  double importance = 0.0;
};

// Sample standard deviation of each term over train, descending, ties by term
// order.
std::vector<TermImportance> TermImportances(const TermStore& store, const Dataset& train);

struct MonotoneViolation {
  std::size_t feature = 0;
  std::vector<double> anchor;
  double x_before = 0.0;
  double x_after = 0.0;
  double drop = 0.0;  // positive magnitude of the wrong-direction change
};

struct MonotoneReport {
  std::size_t lines_checked = 0;
  std::size_t num_violations = 0;
  std::vector<MonotoneViolation> examples;  // first few violations
  bool ok() const { return num_violations == 0; }
};

struct SweepOptions {
  std::size_t n_lines = 1000;
  std::size_t n_grid = 50;
  std::uint64_t seed = 0;
};

// For each feature with a non-zero direction: n_lines random anchors inside
// `domain`, each swept over an n_grid increasing grid of that coordinate.
// Every adjacent change against the direction counts, with no tolerance.
MonotoneReport CheckMonotone(const std::function<double(std::span<const double>)>& f,
                             std::span<const int> monotone, std::span<const FeatureDomain> domain,
                             const SweepOptions& opts);
MonotoneReport CheckMonotoneFull(const TermStore& store, std::span<const int> monotone,
                                 const SweepOptions& opts);

struct OrthogonalityNorm {
  std::size_t j = 0;
  std::size_t k = 0;
  double norm = 0.0;
};

// Refits the purification model to each interaction's train predictions and
// reports max |hat coefficient| / (term standard deviation); zero for a
// constant term.
std::vector<OrthogonalityNorm> OrthogonalityAudit(const TermStore& store, const Dataset& train,
                                                  const PurifyOptions& opts = {});

// Plot data: main_<name>.csv (x,value on 201 points over the domain),
// inter_<a>_<b>.csv (x,y,value on a 51 x 51 grid) and terms.json listing
// terms, importances and files. Returns the manifest path.
std::filesystem::path ExportTerms(const TermStore& store, std::span<const TermImportance> importances,
                                  std::span<const std::string> feature_names,
                                  const std::filesystem::path& dir);

}  // namespace monogami

#endif  // MONOGAMI_ANOVA_H_
