#include "anntune/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_set>

#include "anntune/errors.hpp"

namespace anntune {

double recall_at_k(const std::vector<NeighborList>& ground_truth,
                   const std::vector<NeighborList>& results, std::size_t k) {
  if (ground_truth.size() != results.size()) {
    throw ArgumentError("recall_at_k: " + std::to_string(ground_truth.size()) +
                        " ground-truth lists vs " + std::to_string(results.size()) + " results");
  }
  if (k == 0) throw ArgumentError("recall_at_k: k must be positive");
  if (ground_truth.empty()) return 0.0;

  std::size_t hits = 0;
  for (std::size_t q = 0; q < results.size(); ++q) {
    const auto& truth = ground_truth[q].ids;
    const auto& found = results[q].ids;
    if (truth.size() < k || found.size() < k) {
      throw ArgumentError("recall_at_k: query " + std::to_string(q) + " has fewer than k ids");
    }
    std::unordered_set<NodeId> want(truth.begin(), truth.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t i = 0; i < k; ++i) hits += want.count(found[i]);
  }
  return static_cast<double>(hits) / static_cast<double>(k * results.size());
}

double qps_from_timing(std::size_t query_count, std::size_t repeats, double seconds) {
  if (!(seconds > 0.0)) throw ArgumentError("qps_from_timing: elapsed time must be positive");
  return static_cast<double>(repeats * query_count) / seconds;
}

double measure_qps(const BatchSearch& search, const VectorSet& queries, std::size_t repeats) {
  if (queries.count() == 0) throw ArgumentError("measure_qps: no queries");
  if (repeats == 0) throw ArgumentError("measure_qps: repeats must be positive");

  search(queries);  // warm-up, untimed
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  for (std::size_t r = 0; r < repeats; ++r) search(queries);
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return qps_from_timing(queries.count(), repeats, std::max(seconds, 1e-9));
}

std::uint64_t memory_estimate(const GraphIndex& index, const PcaModel* pca,
                              const EntryPointSelector* selector) {
  const std::uint64_t count = index.size();
  std::uint64_t bytes = kIndexHeaderBytes;
  bytes += count * index.dim() * sizeof(float);
  if (index.base().has_ids()) bytes += count * sizeof(NodeId);
  bytes += index.offsets().size() * sizeof(std::uint64_t);
  bytes += index.edge_count() * sizeof(NodeId);
  if (pca != nullptr) {
    bytes += kSectionHeaderBytes + (pca->d0() + pca->d0() * pca->d()) * sizeof(float);
  }
  if (selector != nullptr) {
    const std::uint64_t c = selector->num_clusters();
    bytes += kSectionHeaderBytes + (c * selector->dim()) * sizeof(float) + c * sizeof(NodeId);
  }
  return bytes;
}

void to_json(nlohmann::json& j, const BenchReport& r) {
  j = nlohmann::json{{"recall_at_k", r.recall_at_k},
                     {"qps", r.qps},
                     {"memory_bytes", r.memory_bytes},
                     {"repeats", r.repeats},
                     {"k", r.k}};
}

void from_json(const nlohmann::json& j, BenchReport& r) {
  j.at("recall_at_k").get_to(r.recall_at_k);
  j.at("qps").get_to(r.qps);
  j.at("memory_bytes").get_to(r.memory_bytes);
  j.at("repeats").get_to(r.repeats);
  j.at("k").get_to(r.k);
}

}  // namespace anntune
