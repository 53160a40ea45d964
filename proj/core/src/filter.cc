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

#include "monogami/filter.h"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "monogami/errors.h"

namespace monogami {

TreeEnsemble FitInitialGam(const Dataset& train, const Dataset* valid, BoostConfig cfg) {
  cfg.max_depth = 1;
  const std::vector<int> unconstrained(train.num_features(), 0);
  const auto spec = ConstraintSpec::Make(unconstrained, {});
  return FitBoosted(train, valid, spec, cfg);
}

double PseudoResidual(double y, double link_score) {
  const double p = std::clamp(Sigmoid(link_score), kResidualProbClip, 1.0 - kResidualProbClip);
  return (y - p) / (p * (1.0 - p));
}

std::vector<double> Residuals(const Dataset& ds, const TreeEnsemble& ens) {
  if (LossFor(ds.response_kind()) != ens.loss) {
    throw ConfigError("model loss does not match the dataset's response kind");
  }
  const auto pred = PredictEnsemble(ens, ds);
  const auto y = ds.response();
  std::vector<double> out(ds.num_rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = ens.loss == LossKind::kSquared ? y[i] - pred[i] : PseudoResidual(y[i], pred[i]);
  }
  return out;
}

namespace {

// Residuals shifted to mean ~0. The score is shift-invariant; centering keeps
// the S^2 / N terms small. Subtracting the first value before the mean makes a
// constant residual vector exactly zero.
std::vector<double> Centered(std::span<const double> resid) {
  std::vector<double> out(resid.begin(), resid.end());
  if (out.empty()) return out;
  const double anchor = out[0];
  double mean = 0.0;
  for (double& r : out) {
    r -= anchor;
    mean += r;
  }
  mean /= static_cast<double>(out.size());
  for (double& r : out) r -= mean;
  return out;
}

double ScoreCentered(std::span<const double> centered, const BinnedDataset& binned, std::size_t j,
                     std::size_t k) {
  const std::size_t bj = binned.num_bins(j);
  const std::size_t bk = binned.num_bins(k);
  if (bj < 2 || bk < 2) return 0.0;

  // Inclusive 2D prefix sums over (bin_j, bin_k).
  std::vector<std::int64_t> count(bj * bk, 0);
  std::vector<double> sum(bj * bk, 0.0);
  const auto& xj = binned.bin_index[j];
  const auto& xk = binned.bin_index[k];
  for (std::size_t i = 0; i < centered.size(); ++i) {
    const std::size_t cell = xj[i] * bk + xk[i];
    ++count[cell];
    sum[cell] += centered[i];
  }
  for (std::size_t a = 0; a < bj; ++a) {
    for (std::size_t b = 0; b < bk; ++b) {
      const std::size_t cell = a * bk + b;
      if (a > 0) {
        count[cell] += count[cell - bk];
        sum[cell] += sum[cell - bk];
      }
      if (b > 0) {
        count[cell] += count[cell - 1];
        sum[cell] += sum[cell - 1];
      }
      if (a > 0 && b > 0) {
        count[cell] -= count[cell - bk - 1];
        sum[cell] -= sum[cell - bk - 1];
      }
    }
  }
  const std::size_t last = bj * bk - 1;
  const std::int64_t n_total = count[last];
  const double s_total = sum[last];
  const double base = n_total > 0 ? s_total * s_total / static_cast<double>(n_total) : 0.0;

  auto term = [](double s, std::int64_t n) { return n > 0 ? s * s / static_cast<double>(n) : 0.0; };
  double best = 0.0;
  for (std::size_t cj = 0; cj + 1 < bj; ++cj) {
    const std::size_t row_end = cj * bk + (bk - 1);
    for (std::size_t ck = 0; ck + 1 < bk; ++ck) {
      const std::size_t corner = cj * bk + ck;
      const std::size_t col_end = (bj - 1) * bk + ck;
      const std::int64_t n00 = count[corner];
      const std::int64_t n01 = count[row_end] - n00;
      const std::int64_t n10 = count[col_end] - n00;
      const std::int64_t n11 = n_total - n00 - n01 - n10;
      const double s00 = sum[corner];
      const double s01 = sum[row_end] - s00;
      const double s10 = sum[col_end] - s00;
      const double s11 = s_total - s00 - s01 - s10;
      // RSS(mean) - RSS(quadrants) = sum_q S_q^2 / N_q - S^2 / N.
      const double reduction =
          term(s00, n00) + term(s01, n01) + term(s10, n10) + term(s11, n11) - base;
      best = std::max(best, reduction);
    }
  }
  return best;
}

void CheckInputs(std::span<const double> resid, const BinnedDataset& binned) {
  if (resid.size() != binned.num_rows()) {
    throw ConfigError("residual count does not match the binned dataset");
  }
  for (double r : resid) {
    if (!std::isfinite(r)) throw ConfigError("non-finite residual");
  }
}

}  // namespace

double FastPairScore(std::span<const double> resid, const BinnedDataset& binned, std::size_t j,
                     std::size_t k) {
  CheckInputs(resid, binned);
  if (j >= binned.num_features() || k >= binned.num_features() || j == k) {
    throw ConfigError("invalid feature pair");
  }
  return ScoreCentered(Centered(resid), binned, j, k);
}

std::vector<PairScore> ScoreAllPairs(std::span<const double> resid, const BinnedDataset& binned) {
  CheckInputs(resid, binned);
  const auto centered = Centered(resid);
  std::vector<PairScore> out;
  const std::size_t p = binned.num_features();
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = j + 1; k < p; ++k) {
      out.push_back({j, k, ScoreCentered(centered, binned, j, k)});
    }
  }
  return out;
}

std::vector<PairScore> FastFilter(std::span<const double> resid, const BinnedDataset& binned,
                                  std::size_t num_pairs) {
  const std::size_t p = binned.num_features();
  const std::size_t available = p * (p - 1) / 2;
  if (num_pairs > available) {
    throw ConfigError("requested " + std::to_string(num_pairs) + " pairs but only " +
                      std::to_string(available) + " exist");
  }
  auto scores = ScoreAllPairs(resid, binned);
  std::stable_sort(scores.begin(), scores.end(),
                   [](const PairScore& a, const PairScore& b) { return a.score > b.score; });
  scores.resize(num_pairs);
  return scores;
}

}  // namespace monogami
