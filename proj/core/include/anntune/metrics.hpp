#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "anntune/entry_point.hpp"
#include "anntune/graph_index.hpp"
#include "anntune/pca.hpp"
#include "anntune/vector_set.hpp"

namespace anntune {

/// Mean over queries of |R ∩ R̂| / k, using the first k ids of each list.
/// Membership is by id; distances are ignored.
double recall_at_k(const std::vector<NeighborList>& ground_truth,
                   const std::vector<NeighborList>& results, std::size_t k);

inline constexpr std::size_t kDefaultQpsRepeats = 10;

using BatchSearch = std::function<void(const VectorSet& queries)>;

/// (repeats * query_count) / seconds.
double qps_from_timing(std::size_t query_count, std::size_t repeats, double seconds);

/// Runs `search` over the whole batch once untimed, then `repeats` times
/// under a monotonic clock, and returns the average queries per second.
double measure_qps(const BatchSearch& search, const VectorSet& queries,
                   std::size_t repeats = kDefaultQpsRepeats);

// Analytic footprint, in bytes:
//   kIndexHeaderBytes
//   + count * dim * 4                      vectors
//   + count * 4                            id map (subsampled or cluster-ordered bases)
//   + offsets * 8 + edges * 4              adjacency (offsets = count + 1)
//   + kSectionHeaderBytes + (d0 + d0*d) * 4                    PCA mean, basis
//   + kSectionHeaderBytes + (clusters * dim + clusters) * 4    selector
inline constexpr std::uint64_t kIndexHeaderBytes = 64;
inline constexpr std::uint64_t kSectionHeaderBytes = 16;

std::uint64_t memory_estimate(const GraphIndex& index, const PcaModel* pca = nullptr,
                              const EntryPointSelector* selector = nullptr);

struct BenchReport {
  double recall_at_k = 0.0;
  double qps = 0.0;
  std::uint64_t memory_bytes = 0;
  std::size_t repeats = kDefaultQpsRepeats;
  std::size_t k = 10;

  friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

void to_json(nlohmann::json& j, const BenchReport& r);
void from_json(const nlohmann::json& j, BenchReport& r);

}  // namespace anntune
