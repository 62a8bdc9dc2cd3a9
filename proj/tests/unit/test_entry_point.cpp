#include <doctest.h>

#include <algorithm>
#include <random>

#include "../support/oracles.hpp"
#include "anntune/entry_point.hpp"
#include "anntune/errors.hpp"
#include "anntune/graph_index.hpp"
#include "anntune/synthetic.hpp"

using namespace anntune;

namespace {

NodeId nearest_row(const VectorSet& base, std::span<const float> x) {
  NodeId best = 0;
  double best_d = oracle::sq_dist(x, base.row(0));
  for (std::size_t i = 1; i < base.count(); ++i) {
    const double d = oracle::sq_dist(x, base.row(i));
    if (d < best_d) {
      best_d = d;
      best = static_cast<NodeId>(i);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("one cluster is the dataset mean") {
  const VectorSet vs = oracle::gaussian(500, 4, 3);
  const EntryPointSelector sel = kmeans_fit(vs, 1, 10, 0);
  const auto mean = column_means(vs);
  for (std::size_t j = 0; j < 4; ++j) CHECK(sel.mean(0)[j] == doctest::Approx(mean[j]).epsilon(1e-5));
  CHECK(sel.centroid_ids()[0] == nearest_row(vs, sel.mean(0)));
}

TEST_CASE("as many clusters as points") {
  const VectorSet vs = oracle::gaussian(20, 3, 4);
  const EntryPointSelector sel = kmeans_fit(vs, 20, 10, 1);
  std::vector<NodeId> ids(sel.centroid_ids().begin(), sel.centroid_ids().end());
  std::sort(ids.begin(), ids.end());
  for (NodeId i = 0; i < 20; ++i) CHECK(ids[i] == i);
  CHECK_THROWS_AS(kmeans_fit(vs, 21, 10, 1), ArgumentError);
  CHECK_THROWS_AS(kmeans_fit(vs, 0, 10, 1), ArgumentError);
}

TEST_CASE("two blobs are found") {
  std::mt19937_64 rng(8);
  std::normal_distribution<float> g(0.0f, 0.5f);
  std::vector<float> v;
  for (int i = 0; i < 400; ++i) {
    const float cx = i % 2 == 0 ? 10.0f : -10.0f;
    v.push_back(cx + g(rng));
    v.push_back(g(rng));
  }
  const EntryPointSelector sel = kmeans_fit(VectorSet(400, 2, v), 2, 25, 3);
  std::vector<float> xs = {sel.mean(0)[0], sel.mean(1)[0]};
  std::sort(xs.begin(), xs.end());
  CHECK(std::abs(xs[0] + 10.0f) <= 0.5f);
  CHECK(std::abs(xs[1] - 10.0f) <= 0.5f);
  CHECK(std::abs(sel.mean(0)[1]) <= 0.5f);
}

TEST_CASE("kmeans invariants") {
  const VectorSet vs = generate_synthetic(2000, 8, 6, 0.8, 4);
  KMeansTrace trace;
  const EntryPointSelector sel = kmeans_fit(vs, 12, 25, 7, &trace);
  REQUIRE(!trace.objective.empty());
  for (std::size_t i = 1; i < trace.objective.size(); ++i) {
    CHECK(trace.objective[i] <= trace.objective[i - 1] * (1 + 1e-9));
  }
  for (std::size_t c = 0; c < sel.num_clusters(); ++c) {
    CHECK(sel.centroid_ids()[c] == nearest_row(vs, sel.mean(c)));
  }
  CHECK(kmeans_fit(vs, 12, 25, 7) == sel);
}

TEST_CASE("kmeans survives duplicate-heavy data") {
  std::vector<float> v(300, 1.0f);
  v[0] = 5.0f;
  const EntryPointSelector sel = kmeans_fit(VectorSet(300, 1, v), 3, 10, 0);
  CHECK(sel.num_clusters() == 3);
  for (NodeId id : sel.centroid_ids()) CHECK(id < 300);
}

TEST_CASE("select_entry") {
  const VectorSet vs = oracle::gaussian(1000, 5, 10);
  const EntryPointSelector one = kmeans_fit(vs, 1, 5, 0);
  const VectorSet q = oracle::gaussian(50, 5, 11, {3, 3, 3, 3, 3});
  for (std::size_t i = 0; i < q.count(); ++i) CHECK(select_entry(one, q.row(i)) == one.centroid_ids()[0]);

  const EntryPointSelector sel = kmeans_fit(vs, 8, 25, 2);
  CHECK(select_entry(sel, sel.mean(3)) == sel.centroid_ids()[3]);
  for (std::size_t i = 0; i < q.count(); ++i) {
    const std::size_t c = nearest_cluster(sel, q.row(i));
    double best = 1e300;
    for (std::size_t m = 0; m < sel.num_clusters(); ++m) best = std::min(best, oracle::sq_dist(q.row(i), sel.mean(m)));
    CHECK(oracle::sq_dist(q.row(i), sel.mean(c)) == best);
    CHECK(select_entry(sel, q.row(i)) == sel.centroid_ids()[c]);
  }
  const std::vector<float> wrong(4, 0.0f);
  CHECK_THROWS_AS(select_entry(sel, wrong), ArgumentError);
}

TEST_CASE("select_entry is translation invariant") {
  const auto grid = oracle::integer_grid(6, 3, 5, -8, 8);
  const auto qs = oracle::integer_grid(40, 3, 6, -8, 8);
  const std::vector<NodeId> ids = {0, 1, 2, 3, 4, 5};
  const EntryPointSelector sel(6, 3, {grid.values().begin(), grid.values().end()}, ids);
  std::vector<float> shifted_means(grid.values().begin(), grid.values().end());
  for (std::size_t i = 0; i < shifted_means.size(); ++i) shifted_means[i] += static_cast<float>(i % 3 + 16);
  const EntryPointSelector moved(6, 3, shifted_means, ids);
  for (std::size_t i = 0; i < qs.count(); ++i) {
    std::vector<float> q(qs.row(i).begin(), qs.row(i).end());
    const NodeId before = select_entry(sel, q);
    for (std::size_t j = 0; j < 3; ++j) q[j] += static_cast<float>(j + 16);
    CHECK(select_entry(moved, q) == before);
  }
}

TEST_CASE("naive and grouped batch search agree") {
  const VectorSet vs = generate_synthetic(3000, 10, 5, 0.85, 12);
  const GraphIndex index = build_index(vs, BuildParams{});
  const VectorSet queries = generate_synthetic(300, 10, 5, 0.85, 13);
  SearchParams sp;
  sp.pool_size = 30;

  SUBCASE("single cluster equals plain batch search from its representative") {
    const EntryPointSelector sel = kmeans_fit(vs, 1, 10, 0);
    SearchParams fixed = sp;
    fixed.entry = sel.centroid_ids()[0];
    CHECK(batch_search_naive(index, sel, queries, sp) == index.search_batch(queries, fixed));
    CHECK(batch_search_grouped(index, sel, queries, sp) == index.search_batch(queries, fixed));
  }
  SUBCASE("no queries") {
    const EntryPointSelector sel = kmeans_fit(vs, 4, 10, 0);
    const VectorSet none(0, 10, {});
    CHECK(batch_search_naive(index, sel, none, sp).empty());
    CHECK(batch_search_grouped(index, sel, none, sp).empty());
  }
  SUBCASE("many clusters, unrolled by hand") {
    for (std::size_t k : {4, 16, 64}) {
      const EntryPointSelector sel = kmeans_fit(vs, k, 25, k);
      const auto naive = batch_search_naive(index, sel, queries, sp);
      CHECK(batch_search_grouped(index, sel, queries, sp) == naive);
      for (std::size_t i = 0; i < queries.count(); i += 37) {
        SearchParams one = sp;
        one.entry = select_entry(sel, queries.row(i));
        CHECK(index.search(queries.row(i), one) == naive[i]);
      }
    }
  }
  SUBCASE("queries sorted by entry still come back in input order") {
    const EntryPointSelector sel = kmeans_fit(vs, 8, 25, 1);
    std::vector<NodeId> order(queries.count());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      return select_entry(sel, queries.row(a)) < select_entry(sel, queries.row(b));
    });
    const VectorSet sel_rows = queries.select_rows(order);
    const VectorSet sorted(queries.count(), 10, {sel_rows.values().begin(), sel_rows.values().end()});
    const auto grouped = batch_search_grouped(index, sel, sorted, sp);
    for (std::size_t i = 0; i < sorted.count(); ++i) {
      SearchParams one = sp;
      one.entry = select_entry(sel, sorted.row(i));
      CHECK(index.search(sorted.row(i), one) == grouped[i]);
    }
  }
}

TEST_CASE("cluster layout groups rows by nearest mean") {
  const VectorSet base = generate_synthetic(600, 6, 4, 0.9, 17);
  const EntryPointSelector sel = kmeans_fit(base, 4, 25, 1);
  const auto order = cluster_layout(sel, base);
  REQUIRE(order.size() == base.count());
  std::vector<NodeId> sorted(order.begin(), order.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto a = nearest_cluster(sel, base.row(order[i - 1]));
    const auto b = nearest_cluster(sel, base.row(order[i]));
    CHECK(a <= b);
    if (a == b) CHECK(order[i - 1] < order[i]);
  }
}

TEST_CASE("relabelled graph and selector give the same neighbours") {
  const VectorSet all = generate_synthetic(2100, 12, 6, 0.9, 23);
  const auto v = all.values();
  const VectorSet base(2000, 12, {v.begin(), v.begin() + 2000 * 12});
  const VectorSet queries(100, 12, {v.begin() + 2000 * 12, v.end()});
  const GraphIndex index = build_index(base, BuildParams{});
  const EntryPointSelector sel = kmeans_fit(index.base(), 8, 25, 2);
  const auto order = cluster_layout(sel, index.base());
  const GraphIndex moved = relabel_nodes(index, order);
  const EntryPointSelector moved_sel = relabel_centroids(sel, order);

  CHECK(moved.edge_count() == index.edge_count());
  CHECK(moved.base().original_id(moved.default_entry()) == index.default_entry());
  for (std::size_t c = 0; c < sel.num_clusters(); ++c) {
    CHECK(moved.base().original_id(moved_sel.centroid_ids()[c]) == sel.centroid_ids()[c]);
  }
  const SearchParams sp{10, 30, {}};
  const auto before = batch_search_grouped(index, sel, queries, sp);
  const auto after = batch_search_grouped(moved, moved_sel, queries, sp);
  for (std::size_t q = 0; q < queries.count(); ++q) {
    std::vector<NodeId> mapped;
    for (NodeId id : after[q].ids) mapped.push_back(moved.base().original_id(id));
    CHECK(mapped == before[q].ids);
    CHECK(after[q].distances == before[q].distances);
  }
}

TEST_CASE("relabel_nodes rejects a non-permutation") {
  const GraphIndex index = build_index(oracle::gaussian(50, 4, 3), BuildParams{});
  std::vector<NodeId> bad(50, 0);
  CHECK_THROWS_AS(relabel_nodes(index, bad), ArgumentError);
  CHECK_THROWS_AS(relabel_nodes(index, std::vector<NodeId>(49, 0)), ArgumentError);
}
