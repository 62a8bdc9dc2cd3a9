#include <doctest.h>

#include <fstream>

#include "../support/oracles.hpp"
#include "../support/temp_dir.hpp"
#include "anntune/antihub.hpp"
#include "anntune/errors.hpp"
#include "anntune/index_io.hpp"
#include "anntune/knn.hpp"
#include "anntune/metrics.hpp"
#include "anntune/pipeline.hpp"
#include "anntune/synthetic.hpp"
#include "anntune/tuner.hpp"

using namespace anntune;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  VectorSet base = generate_synthetic(2000, 24, 6, 0.85, 1);
  VectorSet queries = generate_synthetic(100, 24, 6, 0.85, 2);
  std::vector<NeighborList> truth = brute_force_knn(base, queries, 10);
};

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string load_error(const fs::path& p) {
  try {
    (void)load_pipeline(p);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("disabled reductions reproduce the vanilla index") {
  Fixture f;
  PipelineParams pp;
  pp.d = 24;
  pp.alpha = 1.0;
  pp.num_clusters = 1;
  const Pipeline p = build_pipeline(f.base, pp);
  CHECK_FALSE(p.pca.has_value());
  CHECK(p.index.size() == f.base.count());

  const GraphIndex vanilla = build_index(f.base, BuildParams{});
  SearchParams sp;
  sp.pool_size = 40;
  sp.entry = p.selector->centroid_ids()[0];
  CHECK(p.search(f.queries, SearchParams{10, 40, {}}) == vanilla.search_batch(f.queries, sp));

  EvalConfig cfg;
  cfg.search.pool_size = 40;
  cfg.repeats = 1;
  const auto ev = evaluate_trial({24, 1.0, 1}, f.base, f.queries, f.truth, cfg);
  CHECK(ev.record.recall == recall_at_k(f.truth, vanilla.search_batch(f.queries, sp), 10));
}

TEST_CASE("evaluate_trial recall is recomputable from its results") {
  Fixture f;
  EvalConfig cfg;
  cfg.search.pool_size = 30;
  cfg.repeats = 2;
  const HubnessProfile profile = k_occurrence(f.base, 10);
  const auto ev = evaluate_trial({12, 0.7, 8}, f.base, f.queries, f.truth, cfg, &profile);
  CHECK_FALSE(ev.record.failed);
  CHECK(ev.record.qps > 0.0);
  CHECK(ev.record.memory_bytes > 0);
  CHECK(ev.record.feasible == (ev.record.recall >= 0.9));
  CHECK(recall_at_k(f.truth, ev.results, 10) == ev.record.recall);
  for (const auto& nl : ev.results) {
    for (NodeId id : nl.ids) CHECK(id < f.base.count());
  }
}

TEST_CASE("a degenerate alpha fails the trial instead of throwing") {
  Fixture f;
  EvalConfig cfg;
  cfg.repeats = 1;
  const auto ev = evaluate_trial({24, 0.004, 1}, f.base, f.queries, f.truth, cfg);
  CHECK(ev.record.failed);
  CHECK(ev.record.error.rfind("search", 0) == 0);
  CHECK_FALSE(ev.record.feasible);
}

TEST_CASE("pipeline stage errors name the stage") {
  Fixture f;
  PipelineParams pp;
  pp.d = 99;
  try {
    (void)build_pipeline(f.base, pp);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "pca");
  }
  pp.d = 0;
  pp.alpha = 0.0;
  CHECK_THROWS_AS(build_pipeline(f.base, pp), StageError);
}

TEST_CASE("stage order flag changes where PCA is fitted") {
  Fixture f;
  PipelineParams pp;
  pp.d = 8;
  pp.alpha = 0.6;
  pp.num_clusters = 4;
  const Pipeline a = build_pipeline(f.base, pp);
  pp.order = StageOrder::kPcaThenSubsample;
  const Pipeline b = build_pipeline(f.base, pp);
  CHECK(a.index.size() == b.index.size());
  CHECK_FALSE(*a.pca == *b.pca);
}

TEST_CASE("index file round trip") {
  Fixture f;
  TempDir dir;
  PipelineParams pp;
  pp.d = 10;
  pp.alpha = 0.8;
  pp.num_clusters = 5;
  Pipeline p = build_pipeline(f.base, pp);
  p.index.set_entry_point(3);
  const nlohmann::json meta = {{"k", 10}, {"note", "x"}};
  save_pipeline(p, meta, dir.path() / "a.idx");
  const LoadedPipeline back = load_pipeline(dir.path() / "a.idx");
  CHECK(back.meta == meta);
  CHECK(back.pipeline.index.base() == p.index.base());
  CHECK(back.pipeline.index.entry_point() == 3);
  CHECK(back.pipeline.index.default_entry() == p.index.default_entry());
  CHECK(*back.pipeline.pca == *p.pca);
  CHECK(*back.pipeline.selector == *p.selector);
  CHECK(back.pipeline.memory_bytes() == p.memory_bytes());
  const SearchParams sp{10, 30, {}};
  CHECK(back.pipeline.search(f.queries, sp) == p.search(f.queries, sp));

  Pipeline plain = build_pipeline(f.base, PipelineParams{0, 1.0, 0});
  save_pipeline(plain, {}, dir.path() / "b.idx");
  const LoadedPipeline pb = load_pipeline(dir.path() / "b.idx");
  CHECK_FALSE(pb.pipeline.pca.has_value());
  CHECK_FALSE(pb.pipeline.selector.has_value());
  CHECK(pb.pipeline.search(f.queries, sp) == plain.search(f.queries, sp));
}

TEST_CASE("corrupt index files name the failing section") {
  Fixture f;
  TempDir dir;
  PipelineParams pp;
  pp.d = 10;
  pp.num_clusters = 3;
  const Pipeline p = build_pipeline(f.base, pp);
  const fs::path good = dir.path() / "good.idx";
  save_pipeline(p, {{"a", 1}}, good);
  const std::vector<char> bytes = slurp(good);
  const fs::path bad = dir.path() / "bad.idx";

  auto find_tag = [&](const std::string& tag) {
    const std::string s(bytes.begin(), bytes.end());
    const auto at = s.find(tag, 48);
    REQUIRE(at != std::string::npos);
    return at;
  };

  SUBCASE("flipped vector byte") {
    auto b = bytes;
    b[find_tag("VECS") + 16 + 5] ^= 0x40;
    spill(bad, b);
    CHECK(load_error(bad).find("VECS") != std::string::npos);
  }
  SUBCASE("flipped adjacency byte") {
    auto b = bytes;
    b[find_tag("ADJ ") + 16 + 9] ^= 0x01;
    spill(bad, b);
    CHECK(load_error(bad).find("ADJ") != std::string::npos);
  }
  SUBCASE("flipped PCA byte") {
    auto b = bytes;
    b[find_tag("PCA ") + 16 + 20] ^= 0x01;
    spill(bad, b);
    CHECK(load_error(bad).find("PCA") != std::string::npos);
  }
  SUBCASE("truncated selector") {
    auto b = bytes;
    b.resize(find_tag("SEL ") + 30);
    spill(bad, b);
    CHECK(load_error(bad).find("SEL") != std::string::npos);
  }
  SUBCASE("bad header") {
    auto b = bytes;
    b[0] = 'X';
    spill(bad, b);
    CHECK(load_error(bad).find("header") != std::string::npos);
  }
  SUBCASE("unknown version") {
    auto b = bytes;
    b[8] = 99;
    spill(bad, b);
    CHECK(load_error(bad).find("version") != std::string::npos);
  }
  SUBCASE("empty file") {
    spill(bad, {});
    CHECK(load_error(bad).find("header") != std::string::npos);
  }
  CHECK_THROWS_AS(load_pipeline(dir.path() / "missing.idx"), IoError);
}
