#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "anntune/graph_index.hpp"
#include "anntune/vector_set.hpp"

namespace anntune {

/// k-means means plus, for each cluster, the id of the database vector
/// closest to its mean. Queries start their graph traversal from the
/// representative of the nearest mean.
class EntryPointSelector {
 public:
  EntryPointSelector() = default;
  EntryPointSelector(std::size_t num_clusters, std::size_t dim, std::vector<float> means,
                     std::vector<NodeId> centroid_ids);

  std::size_t num_clusters() const noexcept { return num_clusters_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const float> mean(std::size_t c) const noexcept {
    return {means_.data() + c * dim_, dim_};
  }
  std::span<const float> means() const noexcept { return means_; }
  std::span<const NodeId> centroid_ids() const noexcept { return centroid_ids_; }

  friend bool operator==(const EntryPointSelector&, const EntryPointSelector&) = default;

 private:
  std::size_t num_clusters_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> means_;
  std::vector<NodeId> centroid_ids_;
};

/// Optional per-iteration record of the Lloyd objective (sum of squared
/// distances to the assigned mean, measured after each assignment step).
struct KMeansTrace {
  std::vector<double> objective;
  std::size_t iterations = 0;
};

/// k-means++ seeding then Lloyd iterations until the assignment stops
/// changing or max_iters is reached. An empty cluster is re-seeded at the
/// point farthest from its assigned mean. Deterministic given seed.
EntryPointSelector kmeans_fit(const VectorSet& base, std::size_t num_clusters,
                              std::size_t max_iters, std::uint64_t seed,
                              KMeansTrace* trace = nullptr);

/// Index of the mean nearest to `query` (ties: lowest cluster).
std::size_t nearest_cluster(const EntryPointSelector& selector, std::span<const float> query);

/// Representative node id of the nearest cluster.
NodeId select_entry(const EntryPointSelector& selector, std::span<const float> query);

/// Node order grouping database rows by nearest mean (cluster 0 first, rows
/// in ascending order within a cluster). Returned as new_to_old for
/// relabel_nodes, so each cluster's vectors become contiguous in memory.
std::vector<NodeId> cluster_layout(const EntryPointSelector& selector, const VectorSet& base);

/// `selector` with centroid ids translated through a relabelling.
EntryPointSelector relabel_centroids(const EntryPointSelector& selector,
                                     std::span<const NodeId> new_to_old);

/// Per-query reference path: for each query in order, pick its entry and
/// run one search starting there.
std::vector<NeighborList> batch_search_naive(const GraphIndex& index,
                                             const EntryPointSelector& selector,
                                             const VectorSet& queries,
                                             const SearchParams& params);

/// Gather-style batch path: pick all entries in one pass, group queries by entry
/// (ascending entry id), search each group as a batch, scatter results back
/// to query order. Element-wise identical to batch_search_naive.
std::vector<NeighborList> batch_search_grouped(const GraphIndex& index,
                                               const EntryPointSelector& selector,
                                               const VectorSet& queries,
                                               const SearchParams& params);

}  // namespace anntune
