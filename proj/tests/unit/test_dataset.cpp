#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "../support/oracles.hpp"
#include "../support/temp_dir.hpp"
#include "anntune/distance.hpp"
#include "anntune/entry_point.hpp"
#include "anntune/errors.hpp"
#include "anntune/fvecs.hpp"
#include "anntune/knn.hpp"
#include "anntune/synthetic.hpp"

using namespace anntune;
namespace fs = std::filesystem;

namespace {

void write_raw(const fs::path& p, const std::vector<std::pair<std::int32_t, std::vector<float>>>& recs) {
  std::ofstream out(p, std::ios::binary);
  for (const auto& [d, vals] : recs) {
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(vals.data()), static_cast<std::streamsize>(vals.size() * 4));
  }
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("VectorSet rejects inconsistent construction") {
  CHECK_THROWS_AS(VectorSet(2, 2, {1, 2, 3}), ArgumentError);
  CHECK_THROWS_AS(VectorSet(1, 2, {1, std::numeric_limits<float>::quiet_NaN()}), ArgumentError);
  CHECK_THROWS_AS(VectorSet(1, 1, {1}, std::vector<NodeId>{0, 1}), ArgumentError);
  CHECK_THROWS_AS(VectorSet(2, 1, {1, 2}, std::vector<NodeId>{4, 4}), ArgumentError);
  CHECK_THROWS_AS(VectorSet(1, 0, {}), ArgumentError);
  CHECK_NOTHROW(VectorSet(0, 0, {}));
}

TEST_CASE("select_rows composes id maps") {
  const VectorSet vs(4, 1, {10, 11, 12, 13});
  const VectorSet a = vs.select_rows(std::vector<NodeId>{1, 3});
  CHECK(*a.ids() == std::vector<NodeId>{1, 3});
  const VectorSet b = a.select_rows(std::vector<NodeId>{1});
  CHECK(*b.ids() == std::vector<NodeId>{3});
  CHECK(b.row(0)[0] == 13.0f);
}

TEST_CASE("load_fvecs decodes records in file order") {
  TempDir dir;
  const fs::path p = dir.path() / "two.fvecs";
  write_raw(p, {{2, {1, 2}}, {2, {3, 4}}});
  const VectorSet vs = load_fvecs(p);
  CHECK(vs.count() == 2);
  CHECK(vs.dim() == 2);
  CHECK(std::vector<float>(vs.values().begin(), vs.values().end()) == std::vector<float>{1, 2, 3, 4});
}

TEST_CASE("load_fvecs on an empty file gives an empty set") {
  TempDir dir;
  const fs::path p = dir.path() / "empty.fvecs";
  std::ofstream(p).close();
  const VectorSet vs = load_fvecs(p);
  CHECK(vs.count() == 0);
  CHECK(vs.dim() == 0);
}

TEST_CASE("load_fvecs reports the record with an inconsistent dimension") {
  TempDir dir;
  const fs::path p = dir.path() / "bad.fvecs";
  write_raw(p, {{2, {1, 2}}, {2, {3, 4}}, {4, {5, 6, 7, 8}}});
  try {
    (void)load_fvecs(p);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("record 3") != std::string::npos);
  }
}

TEST_CASE("load_fvecs reports the byte offset of a truncated record") {
  TempDir dir;
  const fs::path p = dir.path() / "trunc.fvecs";
  write_raw(p, {{2, {1, 2}}, {2, {3}}});
  try {
    (void)load_fvecs(p);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("byte offset 16") != std::string::npos);
  }
  CHECK_THROWS_AS(load_fvecs(dir.path() / "missing.fvecs"), IoError);
}

TEST_CASE("fvecs round trip is bit-exact") {
  TempDir dir;
  SUBCASE("two vectors") {
    const VectorSet vs(2, 2, {1, 2, 3, 4});
    save_fvecs(vs, dir.path() / "a.fvecs");
    CHECK(load_fvecs(dir.path() / "a.fvecs") == vs);
  }
  SUBCASE("empty set writes an empty file") {
    save_fvecs(VectorSet{}, dir.path() / "e.fvecs");
    CHECK(fs::file_size(dir.path() / "e.fvecs") == 0);
    CHECK(load_fvecs(dir.path() / "e.fvecs") == VectorSet{});
  }
  SUBCASE("1000 random vectors including awkward bit patterns") {
    std::mt19937 rng(3);
    std::uniform_int_distribution<std::uint32_t> bits;
    std::vector<float> v(1000 * 7);
    for (float& x : v) {
      do {
        const std::uint32_t b = bits(rng);
        std::memcpy(&x, &b, 4);
      } while (!std::isfinite(x));
    }
    const VectorSet vs(1000, 7, v);
    save_fvecs(vs, dir.path() / "r.fvecs");
    const VectorSet back = load_fvecs(dir.path() / "r.fvecs");
    REQUIRE(back.count() == 1000);
    CHECK(std::memcmp(back.values().data(), v.data(), v.size() * 4) == 0);
  }
  CHECK_THROWS_AS(save_fvecs(VectorSet(1, 1, {1}), dir.path() / "no" / "such" / "dir.fvecs"), IoError);
}

TEST_CASE("generate_synthetic is deterministic and validates ranges") {
  CHECK(generate_synthetic(10, 2, 1, 0.0, 7) == generate_synthetic(10, 2, 1, 0.0, 7));
  CHECK_FALSE(generate_synthetic(10, 2, 1, 0.5, 7) == generate_synthetic(10, 2, 1, 0.5, 8));
  CHECK_THROWS_AS(generate_synthetic(2, 2, 3, 0.5, 1), ArgumentError);
  CHECK_THROWS_AS(generate_synthetic(2, 2, 0, 0.5, 1), ArgumentError);
  CHECK_THROWS_AS(generate_synthetic(2, 2, 1, 1.5, 1), ArgumentError);
}

TEST_CASE("generate_synthetic blobs are recoverable by 2-means") {
  const VectorSet vs = generate_synthetic(1000, 8, 2, 1.0, 1);
  const EntryPointSelector sel = kmeans_fit(vs, 2, 50, 5);
  std::size_t sizes[2] = {0, 0};
  for (std::size_t i = 0; i < vs.count(); ++i) ++sizes[nearest_cluster(sel, vs.row(i))];
  CHECK(sizes[0] >= 400);
  CHECK(sizes[1] >= 400);
}

TEST_CASE("generate_synthetic with anisotropy 1 is isotropic per axis") {
  const VectorSet vs = generate_synthetic(20000, 4, 1, 1.0, 11);
  std::vector<double> mean(4, 0.0), var(4, 0.0);
  for (std::size_t i = 0; i < vs.count(); ++i)
    for (std::size_t j = 0; j < 4; ++j) mean[j] += vs.row(i)[j];
  for (double& m : mean) m /= static_cast<double>(vs.count());
  for (std::size_t i = 0; i < vs.count(); ++i)
    for (std::size_t j = 0; j < 4; ++j) var[j] += std::pow(vs.row(i)[j] - mean[j], 2);
  const auto [lo, hi] = std::minmax_element(var.begin(), var.end());
  CHECK(*hi / *lo < 2.0);
}

TEST_CASE("generate_synthetic with low anisotropy concentrates variance") {
  const VectorSet vs = generate_synthetic(5000, 16, 1, 0.5, 2);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < vs.count(); ++i) {
    first += vs.row(i)[0] * vs.row(i)[0];
    last += vs.row(i)[15] * vs.row(i)[15];
  }
  CHECK(first > 100.0 * last);
}

TEST_CASE("brute_force_knn hand example") {
  const VectorSet base = oracle::from_rows({{0, 0}, {1, 0}, {3, 0}});
  const VectorSet q = oracle::from_rows({{0.9f, 0}});
  const auto res = brute_force_knn(base, q, 2);
  REQUIRE(res.size() == 1);
  CHECK(res[0].ids == std::vector<NodeId>{1, 0});
  CHECK(res[0].distances[0] == doctest::Approx(0.01).epsilon(1e-5));
  CHECK(res[0].distances[1] == doctest::Approx(0.81).epsilon(1e-5));
}

TEST_CASE("brute_force_knn finds an identical vector at distance zero") {
  const VectorSet base = oracle::gaussian(50, 6, 4);
  const VectorSet q = base.select_rows(std::vector<NodeId>{5});
  const auto res = brute_force_knn(base, VectorSet(1, 6, {q.values().begin(), q.values().end()}), 1);
  CHECK(res[0].ids[0] == 5);
  CHECK(res[0].distances[0] == 0.0f);
}

TEST_CASE("brute_force_knn argument errors") {
  const VectorSet base = oracle::gaussian(5, 3, 1);
  CHECK_THROWS_AS(brute_force_knn(base, oracle::gaussian(1, 2, 1), 1), ArgumentError);
  CHECK_THROWS_AS(brute_force_knn(base, oracle::gaussian(1, 3, 1), 6), ArgumentError);
  CHECK_THROWS_AS(brute_force_knn(base, oracle::gaussian(1, 3, 1), 0), ArgumentError);
}

TEST_CASE("brute_force_knn matches the full-sort oracle, ties included") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const VectorSet base = oracle::integer_grid(1000, 8, seed, -3, 3);
    const VectorSet q = oracle::integer_grid(100, 8, seed + 100, -3, 3);
    const auto res = brute_force_knn(base, q, 10);
    const auto truth = oracle::full_sort_knn(base, q, 10);
    for (std::size_t i = 0; i < q.count(); ++i) {
      REQUIRE(res[i].ids == truth[i]);
      for (std::size_t j = 0; j < 10; ++j) {
        CHECK(res[i].distances[j] == static_cast<float>(oracle::sq_dist(q.row(i), base.row(res[i].ids[j]))));
      }
    }
  }
}

TEST_CASE("brute_force_knn agrees with the oracle on far-from-origin float data") {
  // Offset data stresses the shortlist margin: norms are large relative to
  // neighbour distances.
  VectorSet g = oracle::gaussian(1000, 16, 9);
  std::vector<float> shifted(g.values().begin(), g.values().end());
  for (float& x : shifted) x += 1000.0f;
  const VectorSet base(1000, 16, shifted);
  const VectorSet q = base.select_rows(std::vector<NodeId>{0, 10, 20, 30});
  const VectorSet qq(4, 16, {q.values().begin(), q.values().end()});
  const auto res = brute_force_knn(base, qq, 10);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(res[i].ids.front() == i * 10);
    const auto truth = oracle::sorted_ids(base, qq.row(i), 10);
    CHECK(oracle::recall({truth}, {res[i].ids}, 10) == 1.0);
  }
}

TEST_CASE("brute_force_knn properties") {
  const VectorSet base = oracle::gaussian(60, 5, 21);
  const VectorSet q = oracle::gaussian(7, 5, 22);
  SUBCASE("k = count returns a permutation of all ids") {
    const auto res = brute_force_knn(base, q, base.count());
    for (const auto& nl : res) {
      std::vector<NodeId> ids = nl.ids;
      std::sort(ids.begin(), ids.end());
      for (std::size_t i = 0; i < ids.size(); ++i) CHECK(ids[i] == i);
      CHECK(std::is_sorted(nl.distances.begin(), nl.distances.end()));
    }
  }
  SUBCASE("first distance is a lower bound for any chosen id") {
    const auto res = brute_force_knn(base, q, 1);
    std::mt19937 rng(1);
    for (std::size_t i = 0; i < q.count(); ++i) {
      for (int t = 0; t < 20; ++t) {
        const auto id = std::uniform_int_distribution<std::size_t>(0, base.count() - 1)(rng);
        CHECK(res[i].distances[0] <= squared_l2(q.row(i), base.row(id)));
      }
    }
  }
}

TEST_CASE("exact_knn_graph excludes self and matches the oracle") {
  const VectorSet base = oracle::integer_grid(300, 4, 8, -2, 2);
  const auto lists = exact_knn_graph(base, 5);
  for (std::size_t v = 0; v < base.count(); ++v) {
    CHECK(lists[v].ids == oracle::sorted_ids(base, base.row(v), 5, static_cast<std::int64_t>(v)));
  }
  CHECK_THROWS_AS(exact_knn_graph(base, 300), ArgumentError);
}
