#include "anntune/pipeline.hpp"

#include <chrono>
#include <exception>

#include "anntune/metrics.hpp"

namespace anntune {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

std::vector<NeighborList> Pipeline::search(const VectorSet& queries,
                                           const SearchParams& params) const {
  return run_stage("search", [&] {
    const VectorSet projected = pca ? pca_transform(*pca, queries) : VectorSet{};
    const VectorSet& q = pca ? projected : queries;
    std::vector<NeighborList> results = selector ? batch_search_grouped(index, *selector, q, params)
                                                 : index.search_batch(q, params);
    const VectorSet& base = index.base();
    if (base.has_ids()) {
      for (auto& nl : results) {
        for (NodeId& id : nl.ids) id = base.original_id(id);
      }
    }
    return results;
  });
}

std::uint64_t Pipeline::memory_bytes() const {
  return memory_estimate(index, pca ? &*pca : nullptr, selector ? &*selector : nullptr);
}

Pipeline build_pipeline(const VectorSet& base, const PipelineParams& params,
                        const HubnessProfile* profile, PipelineTimings* timings) {
  PipelineTimings local;
  PipelineTimings& t = timings != nullptr ? *timings : local;
  t = PipelineTimings{};

  const bool use_pca = params.d != 0 && params.d != base.dim();
  const bool use_subsample = params.alpha != 1.0;
  if (params.d > base.dim()) {
    throw StageError("pca", "target dimension exceeds source dimension");
  }

  Pipeline out;
  auto subsample = [&](const VectorSet& vs, const HubnessProfile* cached) {
    return run_stage("subsample", [&] {
      const auto t0 = Clock::now();
      VectorSet kept;
      if (cached != nullptr) {
        kept = antihub_subsample(vs, *cached, params.alpha);
      } else {
        const HubnessProfile p = k_occurrence(vs, params.k_hub);
        kept = antihub_subsample(vs, p, params.alpha);
      }
      t.subsample_seconds += seconds_since(t0);
      return kept;
    });
  };
  auto reduce = [&](const VectorSet& vs) {
    return run_stage("pca", [&] {
      const auto t0 = Clock::now();
      out.pca = pca_fit(vs, params.d);
      VectorSet projected = pca_transform(*out.pca, vs);
      t.pca_seconds += seconds_since(t0);
      return projected;
    });
  };

  VectorSet reduced;
  if (params.order == StageOrder::kSubsampleThenPca) {
    VectorSet kept = use_subsample ? subsample(base, profile) : base;
    reduced = use_pca ? reduce(kept) : std::move(kept);
  } else {
    VectorSet projected = use_pca ? reduce(base) : base;
    reduced = use_subsample ? subsample(projected, use_pca ? nullptr : profile) : std::move(projected);
  }

  out.index = run_stage("build", [&] {
    const auto t0 = Clock::now();
    GraphIndex index = build_index(std::move(reduced), params.graph);
    t.graph_seconds = seconds_since(t0);
    return index;
  });

  if (params.num_clusters > 0) {
    out.selector = run_stage("kmeans", [&] {
      const auto t0 = Clock::now();
      EntryPointSelector sel =
          kmeans_fit(out.index.base(), params.num_clusters, params.kmeans_iters, params.graph.seed);
      if (params.num_clusters > 1) {
        // Store each cluster contiguously so a query group touches one region.
        const std::vector<NodeId> order = cluster_layout(sel, out.index.base());
        out.index = relabel_nodes(out.index, order);
        sel = relabel_centroids(sel, order);
      }
      t.kmeans_seconds = seconds_since(t0);
      return sel;
    });
  }
  return out;
}

}  // namespace anntune
