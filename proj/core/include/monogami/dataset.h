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

#ifndef MONOGAMI_DATASET_H_
#define MONOGAMI_DATASET_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace monogami {

enum class ResponseKind { kContinuous, kBinary };

const char* ToString(ResponseKind kind);
ResponseKind ResponseKindFromString(const std::string& name);

// Dense n x p feature matrix stored column-major plus a response vector.
// Immutable after construction.
class Dataset {
 public:
  Dataset() = default;
  // Validates: n >= 1, p >= 1, all columns of length n, all values finite,
  // binary responses in {0, 1}. Throws ConfigError otherwise.
  Dataset(std::vector<std::vector<double>> columns, std::vector<double> response,
          ResponseKind kind, std::vector<std::string> feature_names = {});

  std::size_t num_rows() const { return response_.size(); }
  std::size_t num_features() const { return columns_.size(); }
  ResponseKind response_kind() const { return kind_; }

  double feature(std::size_t row, std::size_t col) const { return columns_[col][row]; }
  std::span<const double> column(std::size_t col) const { return columns_[col]; }
  std::span<const double> response() const { return response_; }
  const std::vector<std::string>& feature_names() const { return names_; }

  // Copies row `row` into `out` (size p).
  void Row(std::size_t row, std::span<double> out) const;
  std::vector<double> Row(std::size_t row) const;

  // Rows in the given order (duplicates allowed). An empty row list gives a
  // zero-row dataset with the same schema.
  Dataset Subset(std::span<const std::size_t> rows) const;

  // min/max of a column.
  std::pair<double, double> Range(std::size_t col) const;

 private:
  std::vector<std::vector<double>> columns_;
  std::vector<double> response_;
  std::vector<std::string> names_;
  ResponseKind kind_ = ResponseKind::kContinuous;
};

// Quantile-binned view of a dataset's features.
struct BinnedDataset {
  // bin_index[j][i] in [0, num_bins(j)).
  std::vector<std::vector<std::uint16_t>> bin_index;
  // Ascending cut values per feature; value x falls in bin
  // `lower_bound(edges, x) - edges.begin()`, i.e. x <= edges[b] -> bin <= b.
  std::vector<std::vector<double>> bin_edges;

  std::size_t num_rows() const { return bin_index.empty() ? 0 : bin_index[0].size(); }
  std::size_t num_features() const { return bin_index.size(); }
  std::size_t num_bins(std::size_t feature) const { return bin_edges[feature].size() + 1; }
};

// Bin of `x` given ascending `edges`.
std::size_t BinOf(std::span<const double> edges, double x);

// Lower-interpolation empirical quantile edges at ranks k/B, k = 1..B-1.
// Duplicate edges, and edges at or above the column maximum (which would
// produce empty top bins), are dropped, so a constant feature gets one bin.
BinnedDataset BinFeatures(const Dataset& ds, std::size_t num_bins);

// Portable 64-bit generator. The engine is std::mt19937_64 (whose output
// sequence is fixed by the C++ standard); the distributions below are
// implemented here rather than with <random> distributions, whose algorithms
// are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Standard normal via the Box-Muller transform (one draw per call).
  double Normal();
  // Unbiased integer in [0, bound) by rejection.
  std::uint64_t UniformInt(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

struct SimConfig {
  std::size_t n = 15000;
  double sigma = 2.0;
  std::uint64_t seed = 1;
  ResponseKind response_kind = ResponseKind::kContinuous;

  void Validate() const;
};

// 0.5 x1 + x2 I(x2 > 0) + x3 I(x3 < 0) + 0.5 tanh(3 x4).
double FirstOrderTruth(std::span<const double> x);
// max(x1, x2) + x3 + x4 + x3 x4.
double SecondOrderTruth(std::span<const double> x);

// Four i.i.d. Uniform(-1, 1) features. Continuous: y = f(x) + N(0, sigma^2).
// Binary: y ~ Bernoulli(1 / (1 + exp(-f(x)))). Draw order per row: four
// uniforms, then one noise / Bernoulli draw.
Dataset GenerateFirstOrder(const SimConfig& cfg);
Dataset GenerateSecondOrder(const SimConfig& cfg);

struct SplitFractions {
  double train = 0.5;
  double valid = 0.25;
  double test = 0.25;
};

struct DatasetSplit {
  Dataset train;
  Dataset valid;
  Dataset test;
};

// Seeded Fisher-Yates shuffle, then floor(n * valid) rows to valid,
// floor(n * test) rows to test and the remainder to train. Rows within each
// part keep their original relative order.
DatasetSplit SplitDataset(const Dataset& ds, const SplitFractions& fractions,
                          std::uint64_t seed);
// Index form of SplitDataset, for callers that need the partition itself.
std::array<std::vector<std::size_t>, 3> SplitIndices(std::size_t n,
                                                     const SplitFractions& fractions,
                                                     std::uint64_t seed);

// CSV with header `x1,...,xp,y`, values printed with 17 significant digits.
void WriteCsv(const Dataset& ds, const std::filesystem::path& path);
// Throws IoError on unreadable or malformed files. The response kind is
// taken from `kind` unless `infer_kind` is set, in which case a response
// consisting only of 0 and 1 is read as binary.
Dataset ReadCsv(const std::filesystem::path& path, ResponseKind kind, bool infer_kind);

}  // namespace monogami

#endif  // MONOGAMI_DATASET_H_
