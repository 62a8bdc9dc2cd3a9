#include "anntune/pareto.hpp"

#include <algorithm>
#include <limits>

namespace anntune {

bool dominates(const TrialRecord& a, const TrialRecord& b) noexcept {
  return a.recall >= b.recall && a.qps >= b.qps && (a.recall > b.recall || a.qps > b.qps);
}

std::vector<TrialRecord> pareto_front(const std::vector<TrialRecord>& records) {
  std::vector<TrialRecord> front;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const TrialRecord& r = records[i];
    if (r.failed) continue;
    bool keep = true;
    for (std::size_t j = 0; j < records.size() && keep; ++j) {
      if (j == i || records[j].failed) continue;
      const TrialRecord& o = records[j];
      if (dominates(o, r)) keep = false;
      // Equal objectives: the lowest trial index represents the group.
      if (o.recall == r.recall && o.qps == r.qps &&
          (o.trial_index < r.trial_index || (o.trial_index == r.trial_index && j < i))) {
        keep = false;
      }
    }
    if (keep) front.push_back(r);
  }
  std::sort(front.begin(), front.end(), [](const TrialRecord& a, const TrialRecord& b) {
    if (a.recall != b.recall) return a.recall < b.recall;
    return a.trial_index < b.trial_index;
  });
  return front;
}

std::vector<std::size_t> nondomination_ranks(const std::vector<TrialRecord>& records) {
  const std::size_t n = records.size();
  constexpr std::size_t kUnranked = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> rank(n, kUnranked);
  std::size_t assigned = 0;
  std::size_t live = 0;
  for (const auto& r : records) live += r.failed ? 0 : 1;
  std::size_t level = 0;
  while (assigned < live) {
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
      if (records[i].failed || rank[i] != kUnranked) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < n && !dominated; ++j) {
        if (j == i || records[j].failed || rank[j] != kUnranked) continue;
        dominated = dominates(records[j], records[i]);
      }
      if (!dominated) current.push_back(i);
    }
    for (std::size_t i : current) rank[i] = level;
    assigned += current.size();
    ++level;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (records[i].failed) rank[i] = level;
  }
  return rank;
}

}  // namespace anntune
