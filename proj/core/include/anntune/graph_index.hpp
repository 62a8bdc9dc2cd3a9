#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "anntune/vector_set.hpp"

namespace anntune {

struct BuildParams {
  std::size_t max_degree = 32;
  /// Pool width of the per-node candidate search (>= max_degree).
  std::size_t build_pool = 64;
  /// Degree of the kNN graph the candidate search walks.
  std::size_t knn_neighbors = 32;
  /// Candidates per node handed to edge selection, nearest first.
  std::size_t candidate_limit = 256;
  std::uint64_t seed = 0;
  /// Above this count the candidate kNN graph comes from NN-descent instead
  /// of exact search.
  std::size_t exact_knn_threshold = 20000;
  std::size_t nn_descent_iters = 12;
};

struct SearchParams {
  std::size_t k = 10;
  std::size_t pool_size = 100;
  std::optional<NodeId> entry;
};

struct SearchStats {
  std::uint64_t distance_evals = 0;
  std::uint64_t expansions = 0;
};

/// Proximity graph over a fixed VectorSet with MRNG-pruned adjacency and a
/// navigating entry node. Adjacency is stored flat (CSR): the neighbours of
/// node v are neighbors_[offsets_[v] .. offsets_[v+1]).
class GraphIndex {
 public:
  GraphIndex() = default;

  /// Assembles an index from stored parts and checks every structural
  /// invariant. Throws FormatError on violation.
  GraphIndex(VectorSet base, std::vector<std::uint64_t> offsets, std::vector<NodeId> neighbors,
             std::size_t max_degree, NodeId default_entry, std::uint32_t repaired_edges);

  const VectorSet& base() const noexcept { return base_; }
  std::size_t size() const noexcept { return base_.count(); }
  std::size_t dim() const noexcept { return base_.dim(); }
  std::size_t max_degree() const noexcept { return max_degree_; }
  NodeId default_entry() const noexcept { return default_entry_; }
  NodeId entry_point() const noexcept { return entry_; }
  /// Edges appended by connectivity repair (each may push a node one past
  /// max_degree).
  std::uint32_t repaired_edges() const noexcept { return repaired_edges_; }

  std::span<const NodeId> neighbors(NodeId v) const noexcept {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  std::span<const std::uint64_t> offsets() const noexcept { return offsets_; }

  /// Throws ArgumentError unless pool_size >= k >= 1, k <= size() and any
  /// explicit entry is in range.
  void validate_params(const SearchParams& params) const;
  std::span<const NodeId> flat_neighbors() const noexcept { return neighbors_; }
  std::size_t edge_count() const noexcept { return neighbors_.size(); }

  /// Changes the start node used by searches that do not pass an explicit
  /// entry. Must not race with concurrent searches.
  void set_entry_point(NodeId node);

  /// Best-first search. Returns the top k node ids (rows of base()) by
  /// (squared L2, id). Throws ArgumentError on dim mismatch, invalid params
  /// or an out-of-range entry.
  NeighborList search(std::span<const float> query, const SearchParams& params,
                      SearchStats* stats = nullptr) const;

  /// search() over every row of `queries`, parallel across queries.
  std::vector<NeighborList> search_batch(const VectorSet& queries,
                                         const SearchParams& params) const;

  friend GraphIndex build_index(VectorSet base, const BuildParams& params);

 private:

  VectorSet base_;
  std::vector<std::uint64_t> offsets_;
  std::vector<NodeId> neighbors_;
  std::size_t max_degree_ = 0;
  NodeId default_entry_ = 0;
  NodeId entry_ = 0;
  std::uint32_t repaired_edges_ = 0;
};

/// Builds the graph:
///  1. kNN graph of knn_neighbors neighbours (exact up to
///     exact_knn_threshold vectors, NN-descent above);
///  2. default entry = vector nearest the dataset mean;
///  3. per node, candidates = its kNN list plus the nodes evaluated by a
///     build_pool-wide search for it over the kNN graph from the entry;
///  4. MRNG edge selection: scan candidates by ascending distance, accept c
///     unless an accepted s has dist(s, c) < dist(v, c), stop at max_degree;
///     then each edge v->u is offered back as u->v under the same rule;
///  5. connectivity repair: every node unreachable from the entry gets
///     attached through its component's closest pair to the reached part.
/// Deterministic for fixed input and seed. Requires count >= 2 and
/// build_pool >= max_degree >= 1.
GraphIndex build_index(VectorSet base, const BuildParams& params);

/// MRNG selection over candidates sorted by (distance, id) from `node`.
/// Exposed for tests.
std::vector<NodeId> select_mrng_neighbors(const VectorSet& base, NodeId node,
                                          std::span<const NodeId> sorted_candidates,
                                          std::span<const float> candidate_dists,
                                          std::size_t max_degree);

/// The same graph with node new_to_old[i] renumbered to i: vectors, edges
/// and entries move together, so searches return the same neighbours under
/// the new numbering. The base keeps mapping rows to original database ids.
GraphIndex relabel_nodes(const GraphIndex& index, std::span<const NodeId> new_to_old);

/// Nodes reachable from `start` following out-edges.
std::vector<bool> reachable_from(const GraphIndex& index, NodeId start);

/// Approximate kNN graph by NN-descent (local joins over sampled new/old
/// neighbour lists). Lists are sorted by (distance, id); self excluded.
std::vector<NeighborList> nn_descent_knn_graph(const VectorSet& base, std::size_t k,
                                               std::uint64_t seed, std::size_t max_iters);

}  // namespace anntune
