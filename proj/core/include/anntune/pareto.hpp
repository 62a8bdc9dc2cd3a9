#pragma once

#include <cstddef>
#include <vector>

#include "anntune/records.hpp"

namespace anntune {

/// True when a is at least as good as b in recall and qps and strictly
/// better in one.
bool dominates(const TrialRecord& a, const TrialRecord& b) noexcept;

/// Non-dominated records in (recall, qps), both maximised, sorted by recall
/// ascending. Of several records with equal recall and qps only the lowest
/// trial_index is kept. Failed trials are ignored.
std::vector<TrialRecord> pareto_front(const std::vector<TrialRecord>& records);

/// Non-domination rank of each record (0 = front); failed trials get the
/// largest rank.
std::vector<std::size_t> nondomination_ranks(const std::vector<TrialRecord>& records);

}  // namespace anntune
