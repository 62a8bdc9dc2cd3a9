#include "anntune/entry_point.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "anntune/distance.hpp"
#include "anntune/errors.hpp"

namespace anntune {

EntryPointSelector::EntryPointSelector(std::size_t num_clusters, std::size_t dim,
                                       std::vector<float> means, std::vector<NodeId> centroid_ids)
    : num_clusters_(num_clusters),
      dim_(dim),
      means_(std::move(means)),
      centroid_ids_(std::move(centroid_ids)) {
  if (num_clusters_ == 0) throw ArgumentError("EntryPointSelector: need at least one cluster");
  if (means_.size() != num_clusters_ * dim_ || centroid_ids_.size() != num_clusters_) {
    throw ArgumentError("EntryPointSelector: inconsistent array sizes");
  }
}

namespace {

std::size_t nearest_mean(const std::vector<float>& means, std::size_t k, std::size_t dim,
                         std::span<const float> x, float* out_dist) {
  std::size_t best = 0;
  float best_d = std::numeric_limits<float>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const float d = squared_l2(x.data(), means.data() + c * dim, dim);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (out_dist != nullptr) *out_dist = best_d;
  return best;
}

std::vector<float> kmeanspp_init(const VectorSet& base, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = base.count();
  const std::size_t dim = base.dim();
  std::vector<float> means;
  means.reserve(k * dim);
  std::vector<bool> chosen(n, false);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::size_t pick = first(rng);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < k; ++c) {
    chosen[pick] = true;
    auto row = base.row(pick);
    means.insert(means.end(), row.begin(), row.end());
    if (c + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], static_cast<double>(squared_l2(row, base.row(i))));
      total += d2[i];
    }
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(rng);
      double acc = 0.0;
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Every remaining point coincides with a chosen one.
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
    }
  }
  return means;
}

}  // namespace

EntryPointSelector kmeans_fit(const VectorSet& base, std::size_t num_clusters,
                              std::size_t max_iters, std::uint64_t seed, KMeansTrace* trace) {
  const std::size_t n = base.count();
  const std::size_t dim = base.dim();
  if (num_clusters == 0) throw ArgumentError("kmeans_fit: num_clusters must be positive");
  if (num_clusters > n) {
    throw ArgumentError("kmeans_fit: num_clusters=" + std::to_string(num_clusters) +
                        " exceeds count " + std::to_string(n));
  }
  if (max_iters == 0) throw ArgumentError("kmeans_fit: max_iters must be positive");

  std::mt19937_64 rng(seed);
  std::vector<float> means = kmeanspp_init(base, num_clusters, rng);
  std::vector<std::size_t> assign(n, num_clusters);
  std::vector<float> assign_dist(n, 0.0f);
  if (trace != nullptr) *trace = KMeansTrace{};

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
#pragma omp parallel for schedule(static) reduction(|| : changed)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const std::size_t c = nearest_mean(means, num_clusters, dim, base.row(i), &assign_dist[i]);
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }
    if (trace != nullptr) {
      double objective = 0.0;
      for (float d : assign_dist) objective += d;
      trace->objective.push_back(objective);
      trace->iterations = iter + 1;
    }
    if (!changed) break;

    std::vector<double> sums(num_clusters * dim, 0.0);
    std::vector<std::size_t> sizes(num_clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = base.row(i);
      double* s = sums.data() + assign[i] * dim;
      for (std::size_t j = 0; j < dim; ++j) s[j] += row[j];
      ++sizes[assign[i]];
    }
    std::vector<bool> taken(n, false);
    for (std::size_t c = 0; c < num_clusters; ++c) {
      if (sizes[c] > 0) {
        for (std::size_t j = 0; j < dim; ++j) {
          means[c * dim + j] = static_cast<float>(sums[c * dim + j] / static_cast<double>(sizes[c]));
        }
        continue;
      }
      // Empty cluster: move it onto the point worst served by its mean.
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        if (far == n || assign_dist[i] > assign_dist[far]) far = i;
      }
      taken[far] = true;
      auto row = base.row(far);
      std::copy(row.begin(), row.end(), means.begin() + static_cast<std::ptrdiff_t>(c * dim));
    }
  }

  std::vector<NodeId> centroid_ids(num_clusters);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t cc = 0; cc < static_cast<std::ptrdiff_t>(num_clusters); ++cc) {
    const auto c = static_cast<std::size_t>(cc);
    std::span<const float> mean(means.data() + c * dim, dim);
    NodeId best = 0;
    float best_d = std::numeric_limits<float>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const float d = squared_l2(mean, base.row(i));
      if (d < best_d) {
        best_d = d;
        best = static_cast<NodeId>(i);
      }
    }
    centroid_ids[c] = best;
  }
  return EntryPointSelector(num_clusters, dim, std::move(means), std::move(centroid_ids));
}

std::size_t nearest_cluster(const EntryPointSelector& selector, std::span<const float> query) {
  if (query.size() != selector.dim()) {
    throw ArgumentError("select_entry: query dim " + std::to_string(query.size()) +
                        " != selector dim " + std::to_string(selector.dim()));
  }
  std::size_t best = 0;
  float best_d = std::numeric_limits<float>::infinity();
  for (std::size_t c = 0; c < selector.num_clusters(); ++c) {
    const float d = squared_l2(query, selector.mean(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

NodeId select_entry(const EntryPointSelector& selector, std::span<const float> query) {
  return selector.centroid_ids()[nearest_cluster(selector, query)];
}

std::vector<NodeId> cluster_layout(const EntryPointSelector& selector, const VectorSet& base) {
  const std::size_t n = base.count();
  std::vector<std::uint32_t> cluster(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    cluster[static_cast<std::size_t>(i)] =
        static_cast<std::uint32_t>(nearest_cluster(selector, base.row(static_cast<std::size_t>(i))));
  }
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return cluster[a] < cluster[b]; });
  return order;
}

EntryPointSelector relabel_centroids(const EntryPointSelector& selector,
                                     std::span<const NodeId> new_to_old) {
  std::vector<NodeId> old_to_new(new_to_old.size());
  for (std::size_t i = 0; i < new_to_old.size(); ++i) old_to_new[new_to_old[i]] = static_cast<NodeId>(i);
  std::vector<NodeId> ids;
  for (NodeId c : selector.centroid_ids()) {
    if (c >= old_to_new.size()) throw ArgumentError("relabel_centroids: centroid id out of range");
    ids.push_back(old_to_new[c]);
  }
  const auto means = selector.means();
  return EntryPointSelector(selector.num_clusters(), selector.dim(), {means.begin(), means.end()},
                            std::move(ids));
}

std::vector<NeighborList> batch_search_naive(const GraphIndex& index,
                                             const EntryPointSelector& selector,
                                             const VectorSet& queries,
                                             const SearchParams& params) {
  std::vector<NeighborList> results(queries.count());
  for (std::size_t q = 0; q < queries.count(); ++q) {
    SearchParams p = params;
    p.entry = select_entry(selector, queries.row(q));
    results[q] = index.search(queries.row(q), p);
  }
  return results;
}

std::vector<NeighborList> batch_search_grouped(const GraphIndex& index,
                                               const EntryPointSelector& selector,
                                               const VectorSet& queries,
                                               const SearchParams& params) {
  const std::size_t nq = queries.count();
  std::vector<NeighborList> results(nq);
  if (nq == 0) return results;
  if (queries.dim() != selector.dim()) {
    throw ArgumentError("batch_search_grouped: query dim " + std::to_string(queries.dim()) +
                        " != selector dim " + std::to_string(selector.dim()));
  }
  if (queries.dim() != index.dim()) {
    throw ArgumentError("batch_search_grouped: query dim " + std::to_string(queries.dim()) +
                        " != index dim " + std::to_string(index.dim()));
  }
  index.validate_params(params);
  for (NodeId id : selector.centroid_ids()) {
    if (id >= index.size()) throw ArgumentError("batch_search_grouped: centroid id out of range");
  }

  std::vector<NodeId> entries(nq);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(nq); ++q) {
    entries[static_cast<std::size_t>(q)] = select_entry(selector, queries.row(static_cast<std::size_t>(q)));
  }

  // Groups keyed by entry id, visited in ascending order.
  std::map<NodeId, std::vector<std::size_t>> groups;
  for (std::size_t q = 0; q < nq; ++q) groups[entries[q]].push_back(q);

  for (const auto& [entry, members] : groups) {
    SearchParams p = params;
    p.entry = entry;
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(members.size()); ++m) {
      const std::size_t q = members[static_cast<std::size_t>(m)];
      results[q] = index.search(queries.row(q), p);
    }
  }
  return results;
}

}  // namespace anntune
