#include "anntune/antihub.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "anntune/errors.hpp"
#include "anntune/knn.hpp"

namespace anntune {

HubnessProfile k_occurrence(const VectorSet& base, std::size_t k_hub) {
  if (k_hub == 0) throw ArgumentError("k_occurrence: k_hub must be positive");
  if (k_hub >= base.count()) {
    throw ArgumentError("k_occurrence: k_hub=" + std::to_string(k_hub) +
                        " must be below count " + std::to_string(base.count()));
  }
  const auto lists = exact_knn_graph(base, k_hub);
  HubnessProfile profile;
  profile.k_hub = k_hub;
  profile.counts.assign(base.count(), 0);
  for (const auto& nl : lists) {
    for (NodeId id : nl.ids) ++profile.counts[id];
  }
  return profile;
}

std::size_t antihub_keep_count(std::size_t count, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ArgumentError("antihub: alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
  // Guard against alpha * count landing a rounding step above an integer.
  const double scaled = alpha * static_cast<double>(count);
  const double nearest = std::round(scaled);
  const double keep = std::abs(scaled - nearest) <= 1e-9 * std::max(1.0, scaled)
                          ? nearest
                          : std::ceil(scaled);
  return std::min<std::size_t>(count, static_cast<std::size_t>(keep));
}

std::vector<NodeId> antihub_keep_rows(const HubnessProfile& profile, double alpha) {
  const std::size_t n = profile.counts.size();
  const std::size_t keep = antihub_keep_count(n, alpha);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return profile.counts[a] > profile.counts[b];
  });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

VectorSet antihub_subsample(const VectorSet& base, const HubnessProfile& profile, double alpha) {
  if (profile.counts.size() != base.count()) {
    throw ArgumentError("antihub_subsample: profile was built for a different base");
  }
  const auto rows = antihub_keep_rows(profile, alpha);
  return base.select_rows(rows);
}

}  // namespace anntune
