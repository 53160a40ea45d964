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

#include "monogami/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "monogami/errors.h"

namespace monogami {

const char* ToString(ResponseKind kind) {
  return kind == ResponseKind::kBinary ? "binary" : "continuous";
}

ResponseKind ResponseKindFromString(const std::string& name) {
  if (name == "continuous") return ResponseKind::kContinuous;
  if (name == "binary") return ResponseKind::kBinary;
  throw ConfigError("unknown response kind '" + name + "'");
}

Dataset::Dataset(std::vector<std::vector<double>> columns, std::vector<double> response,
                 ResponseKind kind, std::vector<std::string> feature_names)
    : columns_(std::move(columns)),
      response_(std::move(response)),
      names_(std::move(feature_names)),
      kind_(kind) {
  if (columns_.empty()) throw ConfigError("dataset needs at least one feature");
  if (response_.empty()) throw ConfigError("dataset needs at least one row");
  for (const auto& col : columns_) {
    if (col.size() != response_.size()) {
      throw ConfigError("feature column length does not match response length");
    }
    for (double v : col) {
      if (!std::isfinite(v)) throw ConfigError("non-finite feature value");
    }
  }
  for (double y : response_) {
    if (!std::isfinite(y)) throw ConfigError("non-finite response value");
    if (kind_ == ResponseKind::kBinary && y != 0.0 && y != 1.0) {
      throw ConfigError("binary response must contain only 0 and 1");
    }
  }
  if (names_.empty()) {
    for (std::size_t j = 0; j < columns_.size(); ++j) names_.push_back("x" + std::to_string(j + 1));
  }
  if (names_.size() != columns_.size()) throw ConfigError("feature name count mismatch");
}

void Dataset::Row(std::size_t row, std::span<double> out) const {
  for (std::size_t j = 0; j < columns_.size(); ++j) out[j] = columns_[j][row];
}

std::vector<double> Dataset::Row(std::size_t row) const {
  std::vector<double> out(columns_.size());
  Row(row, out);
  return out;
}

Dataset Dataset::Subset(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> cols(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    cols[j].reserve(rows.size());
    for (std::size_t r : rows) cols[j].push_back(columns_[j][r]);
  }
  std::vector<double> y;
  y.reserve(rows.size());
  for (std::size_t r : rows) y.push_back(response_[r]);
  if (rows.empty()) {
    // Zero rows are allowed here (schema only), unlike in the constructor.
    Dataset empty;
    empty.columns_ = std::move(cols);
    empty.names_ = names_;
    empty.kind_ = kind_;
    return empty;
  }
  return Dataset(std::move(cols), std::move(y), kind_, names_);
}

std::pair<double, double> Dataset::Range(std::size_t col) const {
  const auto [lo, hi] = std::minmax_element(columns_[col].begin(), columns_[col].end());
  return {*lo, *hi};
}

std::size_t BinOf(std::span<const double> edges, double x) {
  return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), x) - edges.begin());
}

BinnedDataset BinFeatures(const Dataset& ds, std::size_t num_bins) {
  if (num_bins < 2) throw ConfigError("bin count must be at least 2");
  if (num_bins > 65536) throw ConfigError("bin count must be at most 65536");
  const std::size_t n = ds.num_rows();
  BinnedDataset out;
  out.bin_index.resize(ds.num_features());
  out.bin_edges.resize(ds.num_features());
  std::vector<double> sorted;
  for (std::size_t j = 0; j < ds.num_features(); ++j) {
    const auto col = ds.column(j);
    sorted.assign(col.begin(), col.end());
    std::sort(sorted.begin(), sorted.end());
    const double max_value = sorted.back();
    auto& edges = out.bin_edges[j];
    for (std::size_t k = 1; k < num_bins; ++k) {
      // Lower interpolation: floor(q * (n - 1)) with q = k / B, in integers.
      const std::size_t rank = (k * (n - 1)) / num_bins;
      const double edge = sorted[rank];
      if (edge >= max_value) break;
      if (edges.empty() || edge > edges.back()) edges.push_back(edge);
    }
    auto& bins = out.bin_index[j];
    bins.resize(n);
    for (std::size_t i = 0; i < n; ++i) bins[i] = static_cast<std::uint16_t>(BinOf(edges, col[i]));
  }
  return out;
}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::Normal() {
  // 1 - U lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::UniformInt(std::uint64_t bound) {
  if (bound == 0) throw ConfigError("UniformInt bound must be positive");
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % bound;
}

void SimConfig::Validate() const {
  if (n < 1) throw ConfigError("simulation needs n >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be finite and >= 0");
}

double FirstOrderTruth(std::span<const double> x) {
  const double e = std::exp(6.0 * x[3]);
  // (e - 1) / (1 + e) overflows to nan for very large x4; tanh(3 x4) is the
  // same function and stays finite.
  const double squash = std::isfinite(e) ? (e - 1.0) / (1.0 + e) : std::tanh(3.0 * x[3]);
  return 0.5 * x[0] + (x[1] > 0.0 ? x[1] : 0.0) + (x[2] < 0.0 ? x[2] : 0.0) + 0.5 * squash;
}

double SecondOrderTruth(std::span<const double> x) {
  return std::max(x[0], x[1]) + (x[2] + x[3] + x[2] * x[3]);
}

namespace {

template <typename Truth>
Dataset Generate(const SimConfig& cfg, Truth truth) {
  cfg.Validate();
  constexpr std::size_t kFeatures = 4;
  Rng rng(cfg.seed);
  std::vector<std::vector<double>> cols(kFeatures, std::vector<double>(cfg.n));
  std::vector<double> y(cfg.n);
  std::array<double, kFeatures> x{};
  for (std::size_t i = 0; i < cfg.n; ++i) {
    for (std::size_t j = 0; j < kFeatures; ++j) {
      x[j] = rng.Uniform(-1.0, 1.0);
      cols[j][i] = x[j];
    }
    const double f = truth(std::span<const double>(x));
    if (cfg.response_kind == ResponseKind::kContinuous) {
      y[i] = f + cfg.sigma * rng.Normal();
    } else {
      const double p = 1.0 / (1.0 + std::exp(-f));
      y[i] = rng.Uniform() < p ? 1.0 : 0.0;
    }
  }
  return Dataset(std::move(cols), std::move(y), cfg.response_kind);
}

}  // namespace

Dataset GenerateFirstOrder(const SimConfig& cfg) { return Generate(cfg, FirstOrderTruth); }

Dataset GenerateSecondOrder(const SimConfig& cfg) { return Generate(cfg, SecondOrderTruth); }

std::array<std::vector<std::size_t>, 3> SplitIndices(std::size_t n,
                                                     const SplitFractions& fractions,
                                                     std::uint64_t seed) {
  if (!(fractions.train > 0.0 && fractions.valid > 0.0 && fractions.test > 0.0)) {
    throw ConfigError("split fractions must be positive");
  }
  if (std::abs(fractions.train + fractions.valid + fractions.test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.UniformInt(i)]);
  }
  const auto n_valid = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions.valid));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions.test));
  const std::size_t n_train = n - n_valid - n_test;

  std::array<std::vector<std::size_t>, 3> parts;
  parts[0].assign(perm.begin(), perm.begin() + n_train);
  parts[1].assign(perm.begin() + n_train, perm.begin() + n_train + n_valid);
  parts[2].assign(perm.begin() + n_train + n_valid, perm.end());
  for (auto& part : parts) std::sort(part.begin(), part.end());
  return parts;
}

DatasetSplit SplitDataset(const Dataset& ds, const SplitFractions& fractions, std::uint64_t seed) {
  const auto parts = SplitIndices(ds.num_rows(), fractions, seed);
  for (const auto& part : parts) {
    if (part.empty()) throw ConfigError("split produced an empty part; dataset too small");
  }
  return DatasetSplit{ds.Subset(parts[0]), ds.Subset(parts[1]), ds.Subset(parts[2])};
}

void WriteCsv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (std::size_t j = 0; j < ds.num_features(); ++j) {
    out << ds.feature_names()[j] << ',';
  }
  out << "y\n";
  char buf[32];
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    for (std::size_t j = 0; j < ds.num_features(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.feature(i, j));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", ds.response()[i]);
    out << buf << '\n';
  }
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

namespace {

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double ParseDouble(const std::string& text, std::size_t line_no, const std::string& file) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\r')) --end;
  if (begin < end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw IoError(file + ":" + std::to_string(line_no) + ": cannot parse number '" + text + "'");
  }
  return value;
}

}  // namespace

Dataset ReadCsv(const std::filesystem::path& path, ResponseKind kind, bool infer_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = SplitLine(line);
  if (header.size() < 2) throw IoError("'" + path.string() + "': header needs x1..xp,y");
  const std::size_t p = header.size() - 1;
  std::vector<std::string> names(header.begin(), header.end() - 1);

  std::vector<std::vector<double>> cols(p);
  std::vector<double> y;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = SplitLine(line);
    if (cells.size() != p + 1) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(p + 1) + " fields, got " + std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < p; ++j) cols[j].push_back(ParseDouble(cells[j], line_no, path.string()));
    y.push_back(ParseDouble(cells[p], line_no, path.string()));
  }
  if (y.empty()) throw IoError("'" + path.string() + "' has no data rows");
  if (infer_kind) {
    const bool binary = std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0 || v == 1.0; });
    kind = binary ? ResponseKind::kBinary : ResponseKind::kContinuous;
  }
  try {
    return Dataset(std::move(cols), std::move(y), kind, std::move(names));
  } catch (const ConfigError& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

}  // namespace monogami
