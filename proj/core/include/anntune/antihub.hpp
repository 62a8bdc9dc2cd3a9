#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "anntune/vector_set.hpp"

namespace anntune {

/// k-occurrence of every database vector: counts[x] is the number of other
/// vectors y whose k_hub exact nearest neighbours (self excluded, ties by
/// ascending id) contain x.
struct HubnessProfile {
  std::vector<std::uint32_t> counts;
  std::size_t k_hub = 0;
};

HubnessProfile k_occurrence(const VectorSet& base, std::size_t k_hub);

/// Number of vectors kept for ratio alpha: ceil(alpha * count).
std::size_t antihub_keep_count(std::size_t count, double alpha);

/// Row indices kept by antihub removal: the ceil(alpha * count) rows with
/// the largest k-occurrence (ties by ascending row), returned in ascending
/// row order.
std::vector<NodeId> antihub_keep_rows(const HubnessProfile& profile, double alpha);

/// Removes the antihubs, keeping ratio alpha of `base` in original order. The
/// result carries ids mapping back to the original database.
VectorSet antihub_subsample(const VectorSet& base, const HubnessProfile& profile, double alpha);

}  // namespace anntune
