#pragma once

#include <cstddef>
#include <vector>

#include "anntune/vector_set.hpp"

namespace anntune {

/// Exact k nearest neighbours of every query, ascending by (squared L2, id).
///
/// Candidates are shortlisted with a blocked matrix product and a rigorous
/// rounding margin, then re-ranked with squared_l2, so the result is the
/// same as a full sort with squared_l2. Ids are row indices of `base`.
/// Parallel across queries; output is order-deterministic.
std::vector<NeighborList> brute_force_knn(const VectorSet& base, const VectorSet& queries,
                                          std::size_t k);

/// Exact k nearest neighbours of every base vector among the other base
/// vectors (self excluded by id, ties by ascending id). Requires k < count.
std::vector<NeighborList> exact_knn_graph(const VectorSet& base, std::size_t k);

}  // namespace anntune
