#include <doctest.h>

#include <chrono>
#include <random>

#include "../support/oracles.hpp"
#include "anntune/entry_point.hpp"
#include "anntune/errors.hpp"
#include "anntune/graph_index.hpp"
#include "anntune/knn.hpp"
#include "anntune/metrics.hpp"
#include "anntune/pca.hpp"

using namespace anntune;

namespace {

NeighborList ids_only(std::vector<NodeId> ids) {
  NeighborList nl;
  nl.distances.assign(ids.size(), 0.0f);
  nl.ids = std::move(ids);
  return nl;
}

}  // namespace

TEST_CASE("recall_at_k basic values") {
  const std::vector<NeighborList> gt = {ids_only({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}),
                                        ids_only({10, 11, 12, 13, 14, 15, 16, 17, 18, 19})};
  CHECK(recall_at_k(gt, gt, 10) == 1.0);

  const std::vector<NeighborList> disjoint = {ids_only({20, 21, 22, 23, 24, 25, 26, 27, 28, 29}),
                                              ids_only({30, 31, 32, 33, 34, 35, 36, 37, 38, 39})};
  CHECK(recall_at_k(gt, disjoint, 10) == 0.0);

  const std::vector<NeighborList> nine = {ids_only({0, 1, 2, 3, 4, 5, 6, 7, 8, 99}),
                                          ids_only({98, 11, 12, 13, 14, 15, 16, 17, 18, 19})};
  CHECK(recall_at_k(gt, nine, 10) == doctest::Approx(0.9));
}

TEST_CASE("recall_at_k errors") {
  const std::vector<NeighborList> one = {ids_only({0, 1})};
  const std::vector<NeighborList> two = {ids_only({0, 1}), ids_only({0, 1})};
  CHECK_THROWS_AS(recall_at_k(one, two, 2), ArgumentError);
  CHECK_THROWS_AS(recall_at_k(one, one, 3), ArgumentError);
}

TEST_CASE("recall_at_k is order invariant and matches the oracle") {
  std::mt19937 rng(5);
  std::vector<NeighborList> gt, res;
  std::vector<std::vector<NodeId>> gt_ids, res_ids;
  for (int q = 0; q < 50; ++q) {
    std::vector<NodeId> a(10), b(10);
    std::uniform_int_distribution<NodeId> u(0, 25);
    std::vector<NodeId> pool(26);
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::copy_n(pool.begin(), 10, a.begin());
    std::shuffle(pool.begin(), pool.end(), rng);
    std::copy_n(pool.begin(), 10, b.begin());
    gt.push_back(ids_only(a));
    res.push_back(ids_only(b));
    gt_ids.push_back(a);
    res_ids.push_back(b);
  }
  const double r = recall_at_k(gt, res, 10);
  CHECK(r == doctest::Approx(oracle::recall(gt_ids, res_ids, 10)).epsilon(1e-12));
  for (auto& nl : res) std::reverse(nl.ids.begin(), nl.ids.end());
  CHECK(recall_at_k(gt, res, 10) == r);
  CHECK(r >= 0.0);
  CHECK(r <= 1.0);
}

TEST_CASE("qps_from_timing") {
  CHECK(qps_from_timing(1000, 1, 0.5) == doctest::Approx(2000.0));
  CHECK(qps_from_timing(100, 10, 2.0) == doctest::Approx(500.0));
  CHECK(kDefaultQpsRepeats == 10);
}

TEST_CASE("measure_qps against a stub with known delay") {
  const VectorSet queries = oracle::gaussian(100, 2, 1);
  // Spins rather than sleeps: sleep_for may overshoot by the timer slack.
  auto stub = [](std::chrono::microseconds delay) {
    return [delay](const VectorSet&) {
      const auto until = std::chrono::steady_clock::now() + delay;
      while (std::chrono::steady_clock::now() < until) {
      }
    };
  };
  std::size_t calls = 0;
  (void)measure_qps([&](const VectorSet&) { ++calls; }, queries, 10);
  CHECK(calls == 11);

  // Preemption can only lower a measurement, so take the best of three.
  auto best_of = [&](std::chrono::microseconds delay) {
    double best = 0.0;
    for (int i = 0; i < 3; ++i) best = std::max(best, measure_qps(stub(delay), queries, 10));
    return best;
  };
  const double fast = best_of(std::chrono::milliseconds(1));
  CHECK(fast == doctest::Approx(100.0 / 0.001).epsilon(0.2));
  const double slow = best_of(std::chrono::milliseconds(2));
  CHECK(slow == doctest::Approx(fast / 2.0).epsilon(0.25));
  CHECK_THROWS_AS(measure_qps(stub(std::chrono::milliseconds(1)), VectorSet{}, 10), ArgumentError);
}

TEST_CASE("memory_estimate") {
  SUBCASE("empty index is header only") {
    CHECK(memory_estimate(GraphIndex{}) == kIndexHeaderBytes);
  }
  const VectorSet base = oracle::gaussian(1000, 16, 3);
  BuildParams bp;
  bp.max_degree = 8;
  bp.build_pool = 16;
  const GraphIndex index = build_index(base, bp);
  const std::uint64_t edges = index.flat_neighbors().size();
  const std::uint64_t plain = 64 + 1000ull * 16 * 4 + 1001ull * 8 + edges * 4;
  SUBCASE("hand formula") { CHECK(memory_estimate(index) == plain); }
  SUBCASE("PCA adds mean and basis plus a section header") {
    const PcaModel pca = pca_fit(oracle::gaussian(100, 16, 4), 8);
    CHECK(memory_estimate(index, &pca) - plain == 16 + (16 + 16 * 8) * 4);
  }
  SUBCASE("selector adds means and representatives") {
    const EntryPointSelector sel = kmeans_fit(base, 4, 5, 1);
    CHECK(memory_estimate(index, nullptr, &sel) - plain == 16 + (4 * 16 + 4) * 4);
  }
  SUBCASE("id map counts when present") {
    std::vector<NodeId> rows(500);
    std::iota(rows.begin(), rows.end(), 0);
    const GraphIndex sub = build_index(base.select_rows(rows), bp);
    CHECK(memory_estimate(sub) ==
          64 + 500ull * 16 * 4 + 500ull * 4 + 501ull * 8 + sub.flat_neighbors().size() * 4);
  }
}

TEST_CASE("BenchReport JSON keys and round trip") {
  BenchReport r;
  r.recall_at_k = 0.93;
  r.qps = 12345.5;
  r.memory_bytes = 987654;
  r.repeats = 10;
  r.k = 10;
  const nlohmann::json j = r;
  for (const char* key : {"recall_at_k", "qps", "memory_bytes", "repeats", "k"}) {
    CHECK(j.contains(key));
  }
  CHECK(j.get<BenchReport>() == r);
}
