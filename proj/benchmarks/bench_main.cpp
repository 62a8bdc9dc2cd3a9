#include <benchmark/benchmark.h>

#include <random>

#include "anntune/distance.hpp"
#include "anntune/entry_point.hpp"
#include "anntune/graph_index.hpp"
#include "anntune/knn.hpp"
#include "anntune/pca.hpp"
#include "anntune/synthetic.hpp"

namespace {

using namespace anntune;

void BM_SquaredL2(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::mt19937 rng(1);
  std::normal_distribution<float> g;
  std::vector<float> a(dim), b(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    a[i] = g(rng);
    b[i] = g(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(squared_l2(a.data(), b.data(), dim));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SquaredL2)->Arg(16)->Arg(64)->Arg(128);

struct Fixture {
  VectorSet base;
  VectorSet queries;
  GraphIndex index;
  EntryPointSelector selector;

  static const Fixture& get() {
    static const Fixture f = [] {
      const VectorSet all = generate_synthetic(20200, 64, 16, 0.9, 11);
      const auto v = all.values();
      Fixture x{VectorSet(20000, 64, {v.begin(), v.begin() + 20000 * 64}),
                VectorSet(200, 64, {v.begin() + 20000 * 64, v.end()}), GraphIndex{},
                EntryPointSelector(1, 64, std::vector<float>(64, 0.0f), {0})};
      x.index = build_index(x.base, BuildParams{});
      x.selector = kmeans_fit(x.index.base(), 16, 25, 0);
      return x;
    }();
    return f;
  }
};

void BM_BruteForce(benchmark::State& state) {
  const Fixture& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_knn(f.base, f.queries, 10));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.queries.count()));
}
BENCHMARK(BM_BruteForce)->Unit(benchmark::kMillisecond);

void BM_GraphSearch(benchmark::State& state) {
  const Fixture& f = Fixture::get();
  const SearchParams p{10, static_cast<std::size_t>(state.range(0)), {}};
  for (auto _ : state) benchmark::DoNotOptimize(f.index.search_batch(f.queries, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.queries.count()));
}
BENCHMARK(BM_GraphSearch)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_GroupedSearch(benchmark::State& state) {
  const Fixture& f = Fixture::get();
  const SearchParams p{10, static_cast<std::size_t>(state.range(0)), {}};
  for (auto _ : state) benchmark::DoNotOptimize(batch_search_grouped(f.index, f.selector, f.queries, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.queries.count()));
}
BENCHMARK(BM_GroupedSearch)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_PcaTransform(benchmark::State& state) {
  const Fixture& f = Fixture::get();
  static const PcaModel model = pca_fit(f.base, 16);
  for (auto _ : state) benchmark::DoNotOptimize(pca_transform(model, f.queries));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.queries.count()));
}
BENCHMARK(BM_PcaTransform)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
