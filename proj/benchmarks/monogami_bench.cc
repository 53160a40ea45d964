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

#include <benchmark/benchmark.h>

#include "monogami/anova.h"
#include "monogami/booster.h"
#include "monogami/dataset.h"
#include "monogami/filter.h"

namespace monogami {
namespace {

Dataset SimData(std::size_t n) {
  SimConfig sim;
  sim.n = n;
  return GenerateSecondOrder(sim);
}

void BM_GrowTree(benchmark::State& state) {
  const Dataset ds = SimData(static_cast<std::size_t>(state.range(0)));
  const SortedColumns sorted(ds);
  std::vector<double> g(ds.num_rows()), h(ds.num_rows(), 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = -ds.response()[i];
  const std::vector<std::pair<std::size_t, std::size_t>> pairs = {{0, 1}, {2, 3}};
  const auto spec = ConstraintSpec::Make({1, 1, 1, 1}, pairs);
  BoostConfig cfg;
  cfg.max_depth = 2;
  std::vector<int> leaf_of_row;
  for (auto _ : state) {
    benchmark::DoNotOptimize(GrowTree(ds, sorted, g, h, spec, cfg, &leaf_of_row));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GrowTree)->Arg(1000)->Arg(7500);

void BM_FastFilter(benchmark::State& state) {
  const Dataset ds = SimData(7500);
  const BinnedDataset binned = BinFeatures(ds, static_cast<std::size_t>(state.range(0)));
  const auto y = ds.response();
  const std::vector<double> resid(y.begin(), y.end());
  for (auto _ : state) benchmark::DoNotOptimize(FastFilter(resid, binned, 2));
}
BENCHMARK(BM_FastFilter)->Arg(8)->Arg(32);

void BM_ParsePurify(benchmark::State& state) {
  const Dataset ds = SimData(7500);
  const std::vector<std::pair<std::size_t, std::size_t>> pairs = {{0, 1}, {2, 3}};
  BoostConfig cfg;
  cfg.n_trees = static_cast<std::size_t>(state.range(0));
  const TreeEnsemble ens = FitBoosted(ds, nullptr, ConstraintSpec::Make({1, 1, 1, 1}, pairs), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(Purify(ParseEnsemble(ens), ds));
}
BENCHMARK(BM_ParsePurify)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace monogami

BENCHMARK_MAIN();
