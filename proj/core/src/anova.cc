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

#include "monogami/anova.h"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "json.hpp"
#include "monogami/errors.h"

namespace monogami {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t IntervalOf(std::span<const double> breaks, double x) {
  return static_cast<std::size_t>(std::lower_bound(breaks.begin(), breaks.end(), x) - breaks.begin());
}

void SortUnique(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Intervals of `breaks` covered by the path interval (lo, hi], inclusive.
std::pair<std::size_t, std::size_t> CoveredIntervals(std::span<const double> breaks, double lo,
                                                     double hi) {
  const std::size_t first = lo == -kInf ? 0 : IntervalOf(breaks, lo) + 1;
  const std::size_t last = hi == kInf ? breaks.size() : IntervalOf(breaks, hi);
  return {first, last};
}

double SampleSd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

// ---------------------------------------------------------------------------
// Term evaluation

std::size_t StepFunction::Interval(double x) const { return IntervalOf(breaks, x); }

HatWeights HatBasisAt(std::span<const double> knots, double x) {
  if (knots.size() < 2 || x <= knots.front()) return {0, 0.0};
  if (x >= knots.back()) return {knots.size() - 2, 1.0};
  const auto it = std::upper_bound(knots.begin(), knots.end(), x);
  const auto i = static_cast<std::size_t>(it - knots.begin()) - 1;
  return {i, (x - knots[i]) / (knots[i + 1] - knots[i])};
}

double PiecewiseLinear::operator()(double x) const {
  if (knots.empty()) return 0.0;
  if (knots.size() == 1) return coefs[0];
  const HatWeights w = HatBasisAt(knots, x);
  return coefs[w.index] * (1.0 - w.t) + coefs[w.index + 1] * w.t;
}

double InteractionTerm::Cell(double xj, double xk) const {
  const std::size_t a = IntervalOf(x_breaks, xj);
  const std::size_t b = IntervalOf(y_breaks, xk);
  return cells[a * (y_breaks.size() + 1) + b];
}

double InteractionTerm::operator()(double xj, double xk) const {
  return Cell(xj, xk) + constant + offset_j(xj) + offset_k(xk);
}

const InteractionTerm* TermStore::FindInteraction(std::size_t j, std::size_t k) const {
  if (j > k) std::swap(j, k);
  for (const auto& term : interactions) {
    if (term.j == j && term.k == k) return &term;
  }
  return nullptr;
}

double TermStore::Predict(std::span<const double> x) const {
  double value = intercept;
  for (const auto& main : mains) value += main.step(x[main.feature]);
  for (const auto& term : interactions) value += term.Cell(x[term.j], x[term.k]);
  for (const auto& term : interactions) value += term.constant;

  std::vector<double> merged;
  for (std::size_t f = 0; f < mains.size(); ++f) {
    const std::vector<double>* knots = nullptr;
    double separate = 0.0;
    auto add = [&](const PiecewiseLinear& pl) {
      if (pl.empty()) return;
      if (knots == nullptr) {
        knots = &pl.knots;
        merged = pl.coefs;
      } else if (pl.knots == *knots) {
        for (std::size_t m = 0; m < merged.size(); ++m) merged[m] += pl.coefs[m];
      } else {
        separate += pl(x[f]);
      }
    };
    add(mains[f].spline);
    for (const auto& term : interactions) {
      if (term.j == f) add(term.offset_j);
      if (term.k == f) add(term.offset_k);
    }
    if (knots != nullptr) value += PiecewiseLinear{*knots, merged}(x[f]);
    value += separate;
  }
  return value;
}

std::vector<double> TermStore::Predict(const Dataset& ds) const {
  std::vector<double> out(ds.num_rows());
  std::vector<double> row(ds.num_features());
  for (std::size_t i = 0; i < out.size(); ++i) {
    ds.Row(i, row);
    out[i] = Predict(row);
  }
  return out;
}

double TermStore::SumOfTerms(std::span<const double> x) const {
  double value = intercept;
  for (const auto& main : mains) value += main(x[main.feature]);
  for (const auto& term : interactions) value += term(x[term.j], x[term.k]);
  return value;
}

double TermStore::PredictMainsOnly(std::span<const double> x) const {
  double value = intercept;
  for (const auto& main : mains) value += main(x[main.feature]);
  return value;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct LeafBox {
  std::size_t j = 0;
  std::size_t k = 0;  // == j for a main-effect leaf
  double lo_j = -kInf, hi_j = kInf;
  double lo_k = -kInf, hi_k = kInf;
  double value = 0.0;
};

void AddFinite(std::vector<double>& out, double a, double b) {
  if (std::isfinite(a)) out.push_back(a);
  if (std::isfinite(b)) out.push_back(b);
}

}  // namespace

TermStore ParseEnsemble(const TreeEnsemble& ens) {
  const std::size_t p = ens.num_features();
  TermStore store;
  store.loss = ens.loss;
  store.intercept = ens.base_score;
  store.mains.resize(p);
  for (std::size_t j = 0; j < p; ++j) store.mains[j].feature = j;

  std::vector<LeafBox> main_leaves;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<LeafBox>> pair_leaves;
  for (auto [j, k] : ens.constraints.pairs()) pair_leaves[{j, k}];

  struct Frame {
    int node;
    std::vector<double> lo, hi;
  };
  for (std::size_t t = 0; t < ens.trees.size(); ++t) {
    const Tree& tree = ens.trees[t];
    std::vector<Frame> stack;
    stack.push_back({0, std::vector<double>(p, -kInf), std::vector<double>(p, kInf)});
    while (!stack.empty()) {
      Frame frame = std::move(stack.back());
      stack.pop_back();
      const TreeNode& node = tree.nodes[frame.node];
      if (!node.is_leaf()) {
        const auto f = static_cast<std::size_t>(node.feature);
        Frame right{node.right, frame.lo, frame.hi};
        right.lo[f] = std::max(right.lo[f], node.threshold);
        frame.hi[f] = std::min(frame.hi[f], node.threshold);
        frame.node = node.left;
        // Right pushed first so leaves are visited left to right.
        stack.push_back(std::move(right));
        stack.push_back(std::move(frame));
        continue;
      }
      std::vector<std::size_t> used;
      for (std::size_t f = 0; f < p; ++f) {
        if (frame.lo[f] != -kInf || frame.hi[f] != kInf) used.push_back(f);
      }
      if (used.empty()) {
        store.intercept += node.value;
      } else if (used.size() == 1) {
        const std::size_t j = used[0];
        main_leaves.push_back({j, j, frame.lo[j], frame.hi[j], -kInf, kInf, node.value});
      } else if (used.size() == 2) {
        const std::size_t j = used[0], k = used[1];
        pair_leaves[{j, k}].push_back(
            {j, k, frame.lo[j], frame.hi[j], frame.lo[k], frame.hi[k], node.value});
      } else {
        throw StructureError("tree " + std::to_string(t) + " has a leaf path over " +
                             std::to_string(used.size()) + " features; at most 2 are supported");
      }
    }
  }

  for (const LeafBox& box : main_leaves) {
    AddFinite(store.mains[box.j].step.breaks, box.lo_j, box.hi_j);
  }
  for (auto& main : store.mains) {
    SortUnique(main.step.breaks);
    main.step.values.assign(main.step.breaks.size() + 1, 0.0);
  }
  for (const LeafBox& box : main_leaves) {
    auto& step = store.mains[box.j].step;
    const auto [first, last] = CoveredIntervals(step.breaks, box.lo_j, box.hi_j);
    for (std::size_t i = first; i <= last; ++i) step.values[i] += box.value;
  }

  for (const auto& [key, boxes] : pair_leaves) {
    InteractionTerm term;
    term.j = key.first;
    term.k = key.second;
    for (const LeafBox& box : boxes) {
      AddFinite(term.x_breaks, box.lo_j, box.hi_j);
      AddFinite(term.y_breaks, box.lo_k, box.hi_k);
    }
    SortUnique(term.x_breaks);
    SortUnique(term.y_breaks);
    const std::size_t cols = term.y_breaks.size() + 1;
    term.cells.assign((term.x_breaks.size() + 1) * cols, 0.0);
    for (const LeafBox& box : boxes) {
      const auto [a0, a1] = CoveredIntervals(term.x_breaks, box.lo_j, box.hi_j);
      const auto [b0, b1] = CoveredIntervals(term.y_breaks, box.lo_k, box.hi_k);
      for (std::size_t a = a0; a <= a1; ++a) {
        for (std::size_t b = b0; b <= b1; ++b) term.cells[a * cols + b] += box.value;
      }
    }
    store.interactions.push_back(std::move(term));
  }

  // Without data, sweep a padded hull of the split thresholds.
  store.domain.resize(p);
  std::vector<std::vector<double>> thresholds(p);
  for (const Tree& tree : ens.trees) {
    for (const TreeNode& node : tree.nodes) {
      if (!node.is_leaf()) thresholds[node.feature].push_back(node.threshold);
    }
  }
  for (std::size_t f = 0; f < p; ++f) {
    if (thresholds[f].empty()) continue;
    const auto [lo, hi] = std::minmax_element(thresholds[f].begin(), thresholds[f].end());
    const double pad = std::max(1.0, *hi - *lo) * 0.1;
    store.domain[f] = {*lo - pad, *hi + pad};
  }
  return store;
}

// ---------------------------------------------------------------------------
// Purification

std::vector<double> UniformKnots(double lo, double hi, std::size_t interior) {
  if (!(hi > lo)) return {lo};
  const std::size_t count = interior + 2;
  std::vector<double> knots(count);
  for (std::size_t m = 0; m < count; ++m) {
    knots[m] = lo + (hi - lo) * static_cast<double>(m) / static_cast<double>(count - 1);
  }
  knots.back() = hi;
  return knots;
}

AdditiveFit FitAdditiveSplines(std::span<const double> y, std::span<const double> xj,
                               std::span<const double> xk, std::span<const double> knots_j,
                               std::span<const double> knots_k, double ridge) {
  const std::size_t n = y.size();
  if (xj.size() != n || xk.size() != n || n == 0) throw ConfigError("spline fit: length mismatch");
  const std::size_t mj = knots_j.size();
  const std::size_t mk = knots_k.size();
  // Columns: constant, hats 0..mj-2 of j, hats 0..mk-2 of k, each hat
  // centered to train mean zero. The last hat of each feature is dropped
  // because the hats sum to one.
  const std::size_t qj = mj - 1, qk = mk - 1;
  const std::size_t q = 1 + qj + qk;

  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(mj + mk));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    auto put = [&](std::span<const double> knots, double x, std::size_t offset) {
      if (knots.size() == 1) {
        basis(r, static_cast<Eigen::Index>(offset)) = 1.0;
        return;
      }
      const HatWeights w = HatBasisAt(knots, x);
      basis(r, static_cast<Eigen::Index>(offset + w.index)) += 1.0 - w.t;
      basis(r, static_cast<Eigen::Index>(offset + w.index + 1)) += w.t;
    };
    put(knots_j, xj[i], 0);
    put(knots_k, xk[i], mj);
  }
  const Eigen::RowVectorXd means = basis.colwise().mean();

  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q));
  design.col(0).setOnes();
  for (std::size_t a = 0; a < qj; ++a) {
    const auto src = static_cast<Eigen::Index>(a);
    design.col(static_cast<Eigen::Index>(1 + a)) = basis.col(src).array() - means(src);
  }
  for (std::size_t a = 0; a < qk; ++a) {
    const auto src = static_cast<Eigen::Index>(mj + a);
    design.col(static_cast<Eigen::Index>(1 + qj + a)) = basis.col(src).array() - means(src);
  }
  const Eigen::Map<const Eigen::VectorXd> target(y.data(), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd gram = design.transpose() * design;
  const Eigen::VectorXd rhs = design.transpose() * target;

  AdditiveFit fit;
  auto well_posed = [](const Eigen::LLT<Eigen::MatrixXd>& llt) {
    if (llt.info() != Eigen::Success) return false;
    const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
    const double lo = diag.minCoeff(), hi = diag.maxCoeff();
    return lo > 0.0 && lo * lo > 1e-13 * hi * hi;
  };
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (!well_posed(llt)) {
    gram.diagonal().array() += ridge;
    llt.compute(gram);
    fit.used_ridge = true;
    if (llt.info() != Eigen::Success) throw Error("spline normal equations are not positive definite");
  }
  const Eigen::VectorXd beta = llt.solve(rhs);

  fit.constant = beta(0);
  auto to_hats = [&](std::size_t offset, std::size_t count, std::size_t mean_offset) {
    // sum_a beta_a (B_a - mean_a) = sum_a (beta_a - s) B_a - s B_last.
    double s = 0.0;
    for (std::size_t a = 0; a < count; ++a) {
      s += beta(static_cast<Eigen::Index>(offset + a)) * means(static_cast<Eigen::Index>(mean_offset + a));
    }
    std::vector<double> coefs(count + 1);
    for (std::size_t a = 0; a < count; ++a) coefs[a] = beta(static_cast<Eigen::Index>(offset + a)) - s;
    coefs[count] = -s;
    return coefs;
  };
  fit.coef_j = to_hats(1, qj, 0);
  fit.coef_k = to_hats(1 + qj, qk, mj);
  return fit;
}

void CenterMainEffects(TermStore& store, const Dataset& train) {
  const std::size_t n = train.num_rows();
  for (auto& main : store.mains) {
    const auto col = train.column(main.feature);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += main(col[i]);
    mean /= static_cast<double>(n);
    const double shift = SnapToQuantum(mean);
    if (shift == 0.0) continue;
    for (double& v : main.step.values) v -= shift;
    store.intercept += shift;
  }
}

TermStore Purify(TermStore store, const Dataset& train, const PurifyOptions& opts) {
  const std::size_t p = store.num_features();
  if (train.num_features() != p) throw ConfigError("purify: train schema does not match the model");

  store.domain.resize(p);
  for (std::size_t f = 0; f < p; ++f) {
    const auto [lo, hi] = train.Range(f);
    store.domain[f] = {lo, hi};
    auto& spline = store.mains[f].spline;
    if (spline.empty()) {
      spline.knots = UniformKnots(lo, hi, opts.interior_knots);
      spline.coefs.assign(spline.knots.size(), 0.0);
    }
  }

  std::sort(store.interactions.begin(), store.interactions.end(),
            [](const InteractionTerm& a, const InteractionTerm& b) {
              return std::tie(a.j, a.k) < std::tie(b.j, b.k);
            });
  const std::size_t n = train.num_rows();
  std::vector<double> target(n);
  for (auto& term : store.interactions) {
    auto& main_j = store.mains[term.j].spline;
    auto& main_k = store.mains[term.k].spline;
    if (term.offset_j.empty()) term.offset_j = {main_j.knots, std::vector<double>(main_j.knots.size(), 0.0)};
    if (term.offset_k.empty()) term.offset_k = {main_k.knots, std::vector<double>(main_k.knots.size(), 0.0)};
    if (term.offset_j.knots != main_j.knots || term.offset_k.knots != main_k.knots) {
      throw StructureError("purify: interaction offsets use different knots than the main effects");
    }

    const auto xj = train.column(term.j);
    const auto xk = train.column(term.k);
    for (std::size_t i = 0; i < n; ++i) target[i] = term(xj[i], xk[i]);
    const AdditiveFit fit = FitAdditiveSplines(target, xj, xk, main_j.knots, main_k.knots, opts.ridge);

    // Snapped so main and offset coefficients cancel exactly in Predict.
    for (std::size_t m = 0; m < fit.coef_j.size(); ++m) {
      const double g = SnapToQuantum(fit.coef_j[m]);
      main_j.coefs[m] += g;
      term.offset_j.coefs[m] -= g;
    }
    for (std::size_t m = 0; m < fit.coef_k.size(); ++m) {
      const double g = SnapToQuantum(fit.coef_k[m]);
      main_k.coefs[m] += g;
      term.offset_k.coefs[m] -= g;
    }
    const double c = SnapToQuantum(fit.constant);
    store.intercept += c;
    term.constant -= c;
  }
  CenterMainEffects(store, train);
  return store;
}

// ---------------------------------------------------------------------------
// Importance and audits

std::string TermId::Label(std::span<const std::string> names) const {
  auto name = [&](std::size_t f) {
    return f < names.size() ? names[f] : "x" + std::to_string(f + 1);
  };
  return is_main() ? name(j) : name(j) + ":" + name(k);
}

std::vector<TermImportance> TermImportances(const TermStore& store, const Dataset& train) {
  const std::size_t n = train.num_rows();
  std::vector<double> values(n);
  std::vector<TermImportance> out;
  for (const auto& main : store.mains) {
    const auto col = train.column(main.feature);
    for (std::size_t i = 0; i < n; ++i) values[i] = main(col[i]);
    out.push_back({TermId{main.feature, TermId::kNone}, SampleSd(values)});
  }
  for (const auto& term : store.interactions) {
    const auto xj = train.column(term.j);
    const auto xk = train.column(term.k);
    for (std::size_t i = 0; i < n; ++i) values[i] = term(xj[i], xk[i]);
    out.push_back({TermId{term.j, term.k}, SampleSd(values)});
  }
  std::sort(out.begin(), out.end(), [](const TermImportance& a, const TermImportance& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.term < b.term;
  });
  return out;
}

MonotoneReport CheckMonotone(const std::function<double(std::span<const double>)>& f,
                             std::span<const int> monotone, std::span<const FeatureDomain> domain,
                             const SweepOptions& opts) {
  if (opts.n_grid < 2) throw ConfigError("monotone sweep needs at least 2 grid points");
  if (domain.size() != monotone.size()) throw ConfigError("monotone sweep: domain size mismatch");
  constexpr std::size_t kMaxExamples = 20;
  const std::size_t p = monotone.size();
  MonotoneReport report;
  Rng rng(opts.seed);
  std::vector<double> x(p);
  for (std::size_t feature = 0; feature < p; ++feature) {
    const int direction = monotone[feature];
    if (direction == 0) continue;
    const FeatureDomain& range = domain[feature];
    for (std::size_t line = 0; line < opts.n_lines; ++line) {
      for (std::size_t j = 0; j < p; ++j) x[j] = rng.Uniform(domain[j].lo, domain[j].hi);
      const std::vector<double> anchor = x;
      double prev = 0.0, prev_x = 0.0;
      for (std::size_t g = 0; g < opts.n_grid; ++g) {
        const double xg = range.lo + (range.hi - range.lo) * static_cast<double>(g) /
                                         static_cast<double>(opts.n_grid - 1);
        x[feature] = xg;
        const double value = f(x);
        if (g > 0) {
          const double change = (value - prev) * direction;
          if (change < 0.0) {
            ++report.num_violations;
            if (report.examples.size() < kMaxExamples) {
              report.examples.push_back({feature, anchor, prev_x, xg, -change});
            }
          }
        }
        prev = value;
        prev_x = xg;
      }
      ++report.lines_checked;
    }
  }
  return report;
}

MonotoneReport CheckMonotoneFull(const TermStore& store, std::span<const int> monotone,
                                 const SweepOptions& opts) {
  return CheckMonotone([&store](std::span<const double> x) { return store.Predict(x); }, monotone,
                       store.domain, opts);
}

std::vector<OrthogonalityNorm> OrthogonalityAudit(const TermStore& store, const Dataset& train,
                                                  const PurifyOptions& opts) {
  const std::size_t n = train.num_rows();
  std::vector<double> target(n);
  std::vector<OrthogonalityNorm> out;
  auto knots_for = [&](std::size_t f) {
    const auto& spline = store.mains[f].spline;
    if (!spline.empty()) return spline.knots;
    const auto [lo, hi] = train.Range(f);
    return UniformKnots(lo, hi, opts.interior_knots);
  };
  for (const auto& term : store.interactions) {
    const auto xj = train.column(term.j);
    const auto xk = train.column(term.k);
    for (std::size_t i = 0; i < n; ++i) target[i] = term(xj[i], xk[i]);
    const double scale = SampleSd(target);
    double norm = 0.0;
    if (scale > 0.0) {
      const AdditiveFit fit =
          FitAdditiveSplines(target, xj, xk, knots_for(term.j), knots_for(term.k), opts.ridge);
      double max_coef = 0.0;
      for (double c : fit.coef_j) max_coef = std::max(max_coef, std::abs(c));
      for (double c : fit.coef_k) max_coef = std::max(max_coef, std::abs(c));
      norm = max_coef / scale;
    }
    out.push_back({term.j, term.k, norm});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export

namespace {

std::string FileSafe(const std::string& name) {
  std::string out;
  for (char c : name) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  }
  return out;
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double GridPoint(const FeatureDomain& d, std::size_t g, std::size_t count) {
  return d.lo + (d.hi - d.lo) * static_cast<double>(g) / static_cast<double>(count - 1);
}

}  // namespace

std::filesystem::path ExportTerms(const TermStore& store, std::span<const TermImportance> importances,
                                  std::span<const std::string> feature_names,
                                  const std::filesystem::path& dir) {
  constexpr std::size_t kMainGrid = 201;
  constexpr std::size_t kPairGrid = 51;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

  auto name_of = [&](std::size_t f) {
    return f < feature_names.size() ? feature_names[f] : "x" + std::to_string(f + 1);
  };
  auto open = [](const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
  };

  nlohmann::json terms = nlohmann::json::array();
  for (const TermImportance& imp : importances) {
    nlohmann::json entry;
    entry["label"] = imp.term.Label(feature_names);
    entry["importance"] = imp.importance;
    if (imp.term.is_main()) {
      const auto& main = store.mains.at(imp.term.j);
      const std::string file = "main_" + FileSafe(name_of(imp.term.j)) + ".csv";
      auto out = open(dir / file);
      out << "x,value\n";
      for (std::size_t g = 0; g < kMainGrid; ++g) {
        const double x = GridPoint(store.domain[imp.term.j], g, kMainGrid);
        out << Num(x) << ',' << Num(main(x)) << '\n';
      }
      entry["kind"] = "main";
      entry["features"] = {name_of(imp.term.j)};
      entry["file"] = file;
    } else {
      const InteractionTerm* term = store.FindInteraction(imp.term.j, imp.term.k);
      if (term == nullptr) throw ConfigError("importance lists an unknown interaction");
      const std::string file =
          "inter_" + FileSafe(name_of(term->j)) + "_" + FileSafe(name_of(term->k)) + ".csv";
      auto out = open(dir / file);
      out << "x,y,value\n";
      for (std::size_t a = 0; a < kPairGrid; ++a) {
        const double x = GridPoint(store.domain[term->j], a, kPairGrid);
        for (std::size_t b = 0; b < kPairGrid; ++b) {
          const double y = GridPoint(store.domain[term->k], b, kPairGrid);
          out << Num(x) << ',' << Num(y) << ',' << Num((*term)(x, y)) << '\n';
        }
      }
      entry["kind"] = "interaction";
      entry["features"] = {name_of(term->j), name_of(term->k)};
      entry["file"] = file;
    }
    terms.push_back(std::move(entry));
  }
  const nlohmann::json manifest = {
      {"intercept", store.intercept}, {"loss", ToString(store.loss)}, {"terms", std::move(terms)}};
  const auto path = dir / "terms.json";
  auto out = open(path);
  out << manifest.dump() << '\n';
  if (!out) throw IoError("write to '" + path.string() + "' failed");
  return path;
}

}  // namespace monogami
