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

#ifndef MONOGAMI_FILTER_H_
#define MONOGAMI_FILTER_H_

#include <cstddef>
#include <span>
#include <vector>

#include "monogami/booster.h"
#include "monogami/dataset.h"

namespace monogami {

// Main-effects-only boosting: stumps over singleton sets, no monotone
// constraints. `cfg.max_depth` is overridden to 1.
TreeEnsemble FitInitialGam(const Dataset& train, const Dataset* valid, BoostConfig cfg);

// Probability clamp used by the binary pseudo-residual.
inline constexpr double kResidualProbClip = 1e-6;

// Continuous: y - f(x). Binary: (y - p) / (p (1 - p)) with p = sigmoid(f(x))
// clamped to [1e-6, 1 - 1e-6].
std::vector<double> Residuals(const Dataset& ds, const TreeEnsemble& ens);
double PseudoResidual(double y, double link_score);

struct PairScore {
  std::size_t j = 0;
  std::size_t k = 0;
  double score = 0.0;

  friend bool operator==(const PairScore&, const PairScore&) = default;
};

// Best 4-quadrant RSS reduction for one feature pair over every interior
// bin-boundary cut (c_j, c_k). Quadrants predict their residual mean; empty
// quadrants predict 0. Zero when either feature has a single bin.
double FastPairScore(std::span<const double> resid, const BinnedDataset& binned, std::size_t j,
                     std::size_t k);

// Scores of every pair j < k, in lexicographic order.
std::vector<PairScore> ScoreAllPairs(std::span<const double> resid, const BinnedDataset& binned);

// The K highest-scoring pairs, descending, ties broken by (j, k). Throws
// ConfigError when K exceeds p (p - 1) / 2.
std::vector<PairScore> FastFilter(std::span<const double> resid, const BinnedDataset& binned,
                                  std::size_t num_pairs);

}  // namespace monogami

#endif  // MONOGAMI_FILTER_H_
