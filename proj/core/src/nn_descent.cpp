#include <algorithm>
#include <random>
#include <string>

#include "anntune/distance.hpp"
#include "anntune/errors.hpp"
#include "anntune/graph_index.hpp"

namespace anntune {

namespace {

struct Neighbor {
  float dist;
  NodeId id;
  bool is_new;
};

inline bool closer(const Neighbor& a, const Neighbor& b) noexcept {
  return a.dist < b.dist || (a.dist == b.dist && a.id < b.id);
}

// Fixed-capacity list kept sorted by (dist, id).
class NeighborHeap {
 public:
  explicit NeighborHeap(std::size_t capacity = 0) : capacity_(capacity) { items_.reserve(capacity + 1); }

  bool insert(NodeId id, float dist) {
    const Neighbor cand{dist, id, true};
    if (items_.size() == capacity_ && !closer(cand, items_.back())) return false;
    for (const Neighbor& nb : items_) {
      if (nb.id == id) return false;
    }
    auto pos = std::lower_bound(items_.begin(), items_.end(), cand, closer);
    items_.insert(pos, cand);
    if (items_.size() > capacity_) items_.pop_back();
    return true;
  }

  std::vector<Neighbor>& items() noexcept { return items_; }
  const std::vector<Neighbor>& items() const noexcept { return items_; }

 private:
  std::size_t capacity_;
  std::vector<Neighbor> items_;
};

void sample_into(std::vector<NodeId>& from, std::size_t limit, std::mt19937_64& rng,
                 std::vector<NodeId>& out) {
  if (from.size() > limit) {
    std::shuffle(from.begin(), from.end(), rng);
    from.resize(limit);
  }
  for (NodeId id : from) {
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
}

}  // namespace

// Runs single-threaded; the update order fixes the result for a given seed.
std::vector<NeighborList> nn_descent_knn_graph(const VectorSet& base, std::size_t k,
                                               std::uint64_t seed, std::size_t max_iters) {
  const std::size_t n = base.count();
  if (k == 0 || k >= n) {
    throw ArgumentError("nn_descent_knn_graph: need 0 < k < count (k=" + std::to_string(k) + ")");
  }
  constexpr double kSampleRate = 0.5;
  constexpr double kTerminationDelta = 0.001;
  const std::size_t sample = std::max<std::size_t>(1, static_cast<std::size_t>(kSampleRate * k));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  std::vector<NeighborHeap> graph(n, NeighborHeap(k));
  for (std::size_t v = 0; v < n; ++v) {
    while (graph[v].items().size() < k) {
      const NodeId u = pick(rng);
      if (u == v) continue;
      graph[v].insert(u, squared_l2(base.row(v), base.row(u)));
    }
  }

  std::vector<std::vector<NodeId>> new_lists(n), old_lists(n), rev_new(n), rev_old(n);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    for (std::size_t v = 0; v < n; ++v) {
      new_lists[v].clear();
      old_lists[v].clear();
      rev_new[v].clear();
      rev_old[v].clear();
    }
    for (std::size_t v = 0; v < n; ++v) {
      std::size_t taken = 0;
      for (Neighbor& nb : graph[v].items()) {
        if (nb.is_new) {
          if (taken < sample) {
            new_lists[v].push_back(nb.id);
            nb.is_new = false;
            ++taken;
          }
        } else {
          old_lists[v].push_back(nb.id);
        }
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      for (NodeId u : new_lists[v]) rev_new[u].push_back(static_cast<NodeId>(v));
      for (NodeId u : old_lists[v]) rev_old[u].push_back(static_cast<NodeId>(v));
    }
    for (std::size_t v = 0; v < n; ++v) {
      sample_into(rev_new[v], sample, rng, new_lists[v]);
      sample_into(rev_old[v], sample, rng, old_lists[v]);
    }

    std::size_t updates = 0;
    auto join = [&](NodeId a, NodeId b) {
      if (a == b) return;
      const float d = squared_l2(base.row(a), base.row(b));
      updates += graph[a].insert(b, d) ? 1 : 0;
      updates += graph[b].insert(a, d) ? 1 : 0;
    };
    for (std::size_t v = 0; v < n; ++v) {
      const auto& nv = new_lists[v];
      const auto& ov = old_lists[v];
      for (std::size_t i = 0; i < nv.size(); ++i) {
        for (std::size_t j = i + 1; j < nv.size(); ++j) join(nv[i], nv[j]);
        for (NodeId o : ov) join(nv[i], o);
      }
    }
    if (static_cast<double>(updates) < kTerminationDelta * static_cast<double>(n * k)) break;
  }

  std::vector<NeighborList> out(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (const Neighbor& nb : graph[v].items()) {
      out[v].ids.push_back(nb.id);
      out[v].distances.push_back(nb.dist);
    }
  }
  return out;
}

}  // namespace anntune
