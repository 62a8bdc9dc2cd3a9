#include "anntune/graph_index.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <string>

#include "anntune/distance.hpp"
#include "anntune/errors.hpp"
#include "anntune/knn.hpp"

namespace anntune {

namespace {

struct PoolEntry {
  float dist;
  NodeId id;
  bool expanded;
};

inline bool closer(float da, NodeId ia, float db, NodeId ib) noexcept {
  return da < db || (da == db && ia < ib);
}

// Per-thread visited marks, reset in O(1) by bumping the epoch.
class VisitedTable {
 public:
  void reset(std::size_t n) {
    if (stamps_.size() < n) stamps_.resize(n, 0);
    if (++epoch_ == 0) {
      std::fill(stamps_.begin(), stamps_.end(), 0);
      epoch_ = 1;
    }
  }
  bool test_and_set(NodeId v) noexcept {
    if (stamps_[v] == epoch_) return true;
    stamps_[v] = epoch_;
    return false;
  }

 private:
  std::vector<std::uint32_t> stamps_;
  std::uint32_t epoch_ = 0;
};

VisitedTable& visited_table() {
  thread_local VisitedTable table;
  return table;
}

inline void prefetch_row(const VectorSet& base, NodeId v) noexcept {
  const auto row = base.row(v);
  const char* p = reinterpret_cast<const char*>(row.data());
  for (std::size_t off = 0; off < row.size_bytes(); off += 64) __builtin_prefetch(p + off);
}

// Best-first search with a sorted pool of at most pool_cap entries. Every
// pool member is expanded before returning. on_eval sees each evaluated node.
template <typename Neighbors, typename OnEval>
std::vector<PoolEntry> best_first(std::span<const float> query, const VectorSet& base,
                                  NodeId start, std::size_t pool_cap, Neighbors&& neighbors_of,
                                  SearchStats* stats, OnEval&& on_eval) {
  VisitedTable& visited = visited_table();
  visited.reset(base.count());

  std::vector<PoolEntry> pool;
  pool.reserve(pool_cap + 1);
  std::vector<NodeId> fresh;
  visited.test_and_set(start);
  pool.push_back({squared_l2(query, base.row(start)), start, false});
  on_eval(start, pool.back().dist);
  std::uint64_t evals = 1;
  std::uint64_t expansions = 0;

  std::size_t cursor = 0;
  while (cursor < pool.size()) {
    if (pool[cursor].expanded) {
      ++cursor;
      continue;
    }
    pool[cursor].expanded = true;
    ++expansions;
    const NodeId v = pool[cursor].id;
    std::size_t lowest_insert = pool.size();
    fresh.clear();
    for (NodeId u : neighbors_of(v)) {
      if (visited.test_and_set(u)) continue;
      fresh.push_back(u);
      prefetch_row(base, u);
    }
    for (NodeId u : fresh) {
      const float d = squared_l2(query, base.row(u));
      ++evals;
      on_eval(u, d);
      if (pool.size() == pool_cap && !closer(d, u, pool.back().dist, pool.back().id)) continue;
      auto pos = std::lower_bound(pool.begin(), pool.end(), PoolEntry{d, u, false},
                                  [](const PoolEntry& a, const PoolEntry& b) {
                                    return closer(a.dist, a.id, b.dist, b.id);
                                  });
      const auto at = static_cast<std::size_t>(pos - pool.begin());
      pool.insert(pos, PoolEntry{d, u, false});
      if (pool.size() > pool_cap) pool.pop_back();
      lowest_insert = std::min(lowest_insert, at);
    }
    cursor = lowest_insert <= cursor ? lowest_insert : cursor + 1;
  }
  if (stats != nullptr) {
    stats->distance_evals += evals;
    stats->expansions += expansions;
  }
  return pool;
}

std::vector<bool> bfs(const std::vector<std::vector<NodeId>>& adj, NodeId start,
                      std::vector<bool> reached) {
  std::deque<NodeId> queue;
  if (!reached[start]) {
    reached[start] = true;
    queue.push_back(start);
  }
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (NodeId u : adj[v]) {
      if (!reached[u]) {
        reached[u] = true;
        queue.push_back(u);
      }
    }
  }
  return reached;
}

NodeId nearest_to_mean(const VectorSet& base) {
  const auto mean_d = column_means(base);
  const std::vector<float> mean(mean_d.begin(), mean_d.end());
  NodeId best = 0;
  float best_d = std::numeric_limits<float>::infinity();
  for (std::size_t i = 0; i < base.count(); ++i) {
    const float d = squared_l2(mean, base.row(i));
    if (d < best_d) {
      best_d = d;
      best = static_cast<NodeId>(i);
    }
  }
  return best;
}

// Attaches every part of the graph unreachable from `entry`. For each
// unreached component (nodes reachable from the lowest unreached id that
// are not yet reached) the closest (reached, member) pair gets an edge.
// Reached endpoints that already carry a repair edge are skipped so no node
// exceeds max_degree + 1.
std::uint32_t repair_connectivity(const VectorSet& base, std::vector<std::vector<NodeId>>& adj,
                                  NodeId entry, std::size_t max_degree) {
  const std::size_t n = base.count();
  std::vector<bool> reached = bfs(adj, entry, std::vector<bool>(n, false));
  std::uint32_t added = 0;
  std::size_t scan = 0;
  while (true) {
    while (scan < n && reached[scan]) ++scan;
    if (scan == n) break;

    // Component of the first unreached node, restricted to unreached nodes.
    std::vector<bool> in_comp(n, false);
    std::vector<NodeId> comp;
    std::deque<NodeId> queue{static_cast<NodeId>(scan)};
    in_comp[scan] = true;
    while (!queue.empty()) {
      const NodeId v = queue.front();
      queue.pop_front();
      comp.push_back(v);
      for (NodeId u : adj[v]) {
        if (!reached[u] && !in_comp[u]) {
          in_comp[u] = true;
          queue.push_back(u);
        }
      }
    }
    std::sort(comp.begin(), comp.end());

    std::vector<NodeId> anchors;
    for (std::size_t r = 0; r < n; ++r) {
      if (reached[r] && adj[r].size() <= max_degree) anchors.push_back(static_cast<NodeId>(r));
    }
    if (anchors.empty()) {
      for (std::size_t r = 0; r < n; ++r) {
        if (reached[r]) anchors.push_back(static_cast<NodeId>(r));
      }
    }

    struct Pair {
      float dist = std::numeric_limits<float>::infinity();
      NodeId from = 0;
      NodeId to = 0;
    };
    std::vector<Pair> best_per_member(comp.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t mi = 0; mi < static_cast<std::ptrdiff_t>(comp.size()); ++mi) {
      Pair best;
      const NodeId member = comp[static_cast<std::size_t>(mi)];
      best.to = member;
      for (NodeId r : anchors) {
        const float d = squared_l2(base.row(r), base.row(member));
        if (d < best.dist) {
          best.dist = d;
          best.from = r;
        }
      }
      best_per_member[static_cast<std::size_t>(mi)] = best;
    }
    Pair best = best_per_member.front();
    for (const Pair& p : best_per_member) {
      if (p.dist < best.dist || (p.dist == best.dist && (p.from < best.from ||
                                                         (p.from == best.from && p.to < best.to)))) {
        best = p;
      }
    }
    adj[best.from].push_back(best.to);
    ++added;
    reached = bfs(adj, best.to, std::move(reached));
  }
  return added;
}

}  // namespace

GraphIndex::GraphIndex(VectorSet base, std::vector<std::uint64_t> offsets,
                       std::vector<NodeId> flat_neighbors, std::size_t max_degree,
                       NodeId default_entry, std::uint32_t repaired_edges)
    : base_(std::move(base)),
      offsets_(std::move(offsets)),
      neighbors_(std::move(flat_neighbors)),
      max_degree_(max_degree),
      default_entry_(default_entry),
      entry_(default_entry),
      repaired_edges_(repaired_edges) {
  const std::size_t n = base_.count();
  if (n == 0) {
    if (!neighbors_.empty() || offsets_.size() > 1) throw FormatError("ADJ: edges without vectors");
    return;
  }
  if (offsets_.size() != n + 1 || offsets_.front() != 0 || offsets_.back() != neighbors_.size()) {
    throw FormatError("ADJ: offsets do not match node and edge counts");
  }
  if (default_entry_ >= n) throw FormatError("header: default entry out of range");
  for (std::size_t v = 0; v < n; ++v) {
    if (offsets_[v + 1] < offsets_[v]) throw FormatError("ADJ: offsets not monotone");
    const auto nb = neighbors(static_cast<NodeId>(v));
    if (nb.size() > max_degree_ + 1) throw FormatError("ADJ: degree exceeds max_degree + 1");
    std::vector<NodeId> sorted(nb.begin(), nb.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] >= n) throw FormatError("ADJ: neighbour id out of range");
      if (sorted[i] == v) throw FormatError("ADJ: self-loop");
      if (i > 0 && sorted[i] == sorted[i - 1]) throw FormatError("ADJ: duplicate neighbour");
    }
  }
}

void GraphIndex::set_entry_point(NodeId node) {
  if (node >= size()) {
    throw ArgumentError("set_entry_point: node " + std::to_string(node) + " out of range");
  }
  entry_ = node;
}

void GraphIndex::validate_params(const SearchParams& params) const {
  if (params.k < 1) throw ArgumentError("search: k must be positive");
  if (params.pool_size < params.k) throw ArgumentError("search: pool_size must be >= k");
  if (params.k > size()) {
    throw ArgumentError("search: k=" + std::to_string(params.k) + " exceeds index size " +
                        std::to_string(size()));
  }
  if (params.entry && *params.entry >= size()) {
    throw ArgumentError("search: entry " + std::to_string(*params.entry) + " out of range");
  }
}

NeighborList GraphIndex::search(std::span<const float> query, const SearchParams& params,
                                SearchStats* stats) const {
  if (query.size() != dim()) {
    throw ArgumentError("search: query dim " + std::to_string(query.size()) + " != index dim " +
                        std::to_string(dim()));
  }
  validate_params(params);

  const NodeId start = params.entry.value_or(entry_);
  const std::vector<PoolEntry> pool = best_first(
      query, base_, start, params.pool_size, [this](NodeId v) { return neighbors(v); }, stats,
      [](NodeId, float) {});

  NeighborList out;
  const std::size_t k = std::min(params.k, pool.size());
  out.ids.reserve(k);
  out.distances.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.ids.push_back(pool[i].id);
    out.distances.push_back(pool[i].dist);
  }
  return out;
}

std::vector<NeighborList> GraphIndex::search_batch(const VectorSet& queries,
                                                   const SearchParams& params) const {
  if (queries.count() > 0 && queries.dim() != dim()) {
    throw ArgumentError("search_batch: query dim " + std::to_string(queries.dim()) +
                        " != index dim " + std::to_string(dim()));
  }
  validate_params(params);
  std::vector<NeighborList> out(queries.count());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(queries.count()); ++i) {
    out[static_cast<std::size_t>(i)] = search(queries.row(static_cast<std::size_t>(i)), params);
  }
  return out;
}

std::vector<NodeId> select_mrng_neighbors(const VectorSet& base, NodeId node,
                                          std::span<const NodeId> sorted_candidates,
                                          std::span<const float> candidate_dists,
                                          std::size_t max_degree) {
  std::vector<NodeId> accepted;
  accepted.reserve(max_degree);
  for (std::size_t i = 0; i < sorted_candidates.size() && accepted.size() < max_degree; ++i) {
    const NodeId c = sorted_candidates[i];
    if (c == node) continue;
    const float to_node = candidate_dists[i];
    bool occluded = false;
    for (NodeId s : accepted) {
      if (s == c || squared_l2(base.row(s), base.row(c)) < to_node) {
        occluded = true;
        break;
      }
    }
    if (!occluded) accepted.push_back(c);
  }
  return accepted;
}

GraphIndex build_index(VectorSet base, const BuildParams& params) {
  const std::size_t n = base.count();
  if (n < 2) throw ArgumentError("build_index: need at least 2 vectors, got " + std::to_string(n));
  if (params.max_degree < 1) throw ArgumentError("build_index: max_degree must be positive");
  if (params.build_pool < params.max_degree) {
    throw ArgumentError("build_index: build_pool must be >= max_degree");
  }
  if (params.knn_neighbors < 1) throw ArgumentError("build_index: knn_neighbors must be positive");

  const std::size_t k = std::min(params.knn_neighbors, n - 1);
  const std::vector<NeighborList> knn =
      n <= params.exact_knn_threshold
          ? exact_knn_graph(base, k)
          : nn_descent_knn_graph(base, k, params.seed, params.nn_descent_iters);
  const NodeId entry = nearest_to_mean(base);

  // Candidates: the node's kNN list plus every node evaluated by a search for
  // it over the kNN graph from the entry. The search supplies the long-range
  // edges that kNN lists alone lack.
  const std::size_t limit = std::max(params.candidate_limit, params.max_degree);
  std::vector<std::vector<NodeId>> adj(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t vi = 0; vi < static_cast<std::ptrdiff_t>(n); ++vi) {
    const auto v = static_cast<NodeId>(vi);
    std::vector<std::pair<float, NodeId>> cands;
    const auto& own = knn[v];
    for (std::size_t i = 0; i < own.ids.size(); ++i) cands.emplace_back(own.distances[i], own.ids[i]);
    best_first(
        base.row(v), base, entry, params.build_pool,
        [&knn](NodeId u) { return std::span<const NodeId>(knn[u].ids); }, nullptr,
        [&](NodeId u, float d) {
          if (u != v) cands.emplace_back(d, u);
        });
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    if (cands.size() > limit) cands.resize(limit);
    std::vector<NodeId> ids;
    std::vector<float> dists;
    for (const auto& [d, u] : cands) {
      ids.push_back(u);
      dists.push_back(d);
    }
    adj[v] = select_mrng_neighbors(base, v, ids, dists, params.max_degree);
  }

  // Reverse edges: offer v to each of its neighbours, re-selecting with the
  // same rule when the neighbour's list is full.
  for (std::size_t v = 0; v < n; ++v) {
    const std::vector<NodeId> out_edges = adj[v];
    for (NodeId u : out_edges) {
      auto& list = adj[u];
      if (std::find(list.begin(), list.end(), static_cast<NodeId>(v)) != list.end()) continue;
      if (list.size() < params.max_degree) {
        list.push_back(static_cast<NodeId>(v));
        continue;
      }
      std::vector<std::pair<float, NodeId>> pool;
      for (NodeId w : list) pool.emplace_back(squared_l2(base.row(u), base.row(w)), w);
      pool.emplace_back(squared_l2(base.row(u), base.row(v)), static_cast<NodeId>(v));
      std::sort(pool.begin(), pool.end());
      std::vector<NodeId> ids;
      std::vector<float> dists;
      for (const auto& [d, w] : pool) {
        ids.push_back(w);
        dists.push_back(d);
      }
      list = select_mrng_neighbors(base, u, ids, dists, params.max_degree);
    }
  }

  const std::uint32_t repaired = repair_connectivity(base, adj, entry, params.max_degree);

  std::vector<std::uint64_t> offsets(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) offsets[v + 1] = offsets[v] + adj[v].size();
  std::vector<NodeId> flat;
  flat.reserve(offsets.back());
  for (auto& list : adj) flat.insert(flat.end(), list.begin(), list.end());

  GraphIndex index;
  index.base_ = std::move(base);
  index.offsets_ = std::move(offsets);
  index.neighbors_ = std::move(flat);
  index.max_degree_ = params.max_degree;
  index.default_entry_ = entry;
  index.entry_ = entry;
  index.repaired_edges_ = repaired;
  return index;
}

GraphIndex relabel_nodes(const GraphIndex& index, std::span<const NodeId> new_to_old) {
  const std::size_t n = index.size();
  if (new_to_old.size() != n) throw ArgumentError("relabel_nodes: permutation size mismatch");
  std::vector<NodeId> old_to_new(n, static_cast<NodeId>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const NodeId old = new_to_old[i];
    if (old >= n || old_to_new[old] != n) throw ArgumentError("relabel_nodes: not a permutation");
    old_to_new[old] = static_cast<NodeId>(i);
  }
  std::vector<std::uint64_t> offsets(n + 1, 0);
  std::vector<NodeId> flat;
  flat.reserve(index.edge_count());
  for (std::size_t i = 0; i < n; ++i) {
    for (NodeId u : index.neighbors(new_to_old[i])) flat.push_back(old_to_new[u]);
    offsets[i + 1] = flat.size();
  }
  GraphIndex out(index.base().select_rows(new_to_old), std::move(offsets), std::move(flat),
                 index.max_degree(), old_to_new[index.default_entry()], index.repaired_edges());
  out.set_entry_point(old_to_new[index.entry_point()]);
  return out;
}

std::vector<bool> reachable_from(const GraphIndex& index, NodeId start) {
  const std::size_t n = index.size();
  std::vector<bool> reached(n, false);
  if (start >= n) return reached;
  std::deque<NodeId> queue{start};
  reached[start] = true;
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (NodeId u : index.neighbors(v)) {
      if (!reached[u]) {
        reached[u] = true;
        queue.push_back(u);
      }
    }
  }
  return reached;
}

}  // namespace anntune
