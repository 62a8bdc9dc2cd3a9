#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "anntune/records.hpp"

namespace anntune {

enum class TuneMode { kConstrained, kMulti };

struct TpeOptions {
  double gamma = 0.25;
  std::size_t startup_trials = 10;
  std::size_t candidates_per_suggest = 24;
  /// Lower bound on every kernel width, as a fraction of the bound range.
  double bandwidth_floor = 0.01;
  double recall_threshold = 0.9;
  TuneMode mode = TuneMode::kConstrained;
  std::uint64_t seed = 0;
};

/// max(1, ceil(gamma * n)).
std::size_t good_group_size(std::size_t n, double gamma);

/// History indices ordered best-first for the good/bad split.
///  constrained: feasible by qps desc, then infeasible by recall desc
///               (smallest violation first), then failed trials;
///  multi:       non-domination rank asc, crowding distance desc within a
///               rank, then failed trials.
/// Remaining ties go to the lower trial index.
std::vector<std::size_t> rank_history(const std::vector<TrialRecord>& history,
                                      const TpeOptions& options);

struct GoodBadSplit {
  std::vector<std::size_t> good;
  std::vector<std::size_t> bad;
};
GoodBadSplit split_history(const std::vector<TrialRecord>& history, const TpeOptions& options);

/// Tree-structured Parzen estimator over (d, alpha, num_clusters).
///
/// With fewer than startup_trials finished trials it samples uniformly.
/// Afterwards it fits, per dimension, a Parzen mixture l(x) on the good group
/// and g(x) on the bad group: one Gaussian per observation plus a prior
/// kernel centred on the range with width equal to the range, each
/// truncated to the bounds. Kernel width follows Scott's rule,
/// 1.06 * stddev * n^(-1/5), floored at
/// max(bandwidth_floor, 1 / (1 + n)) * range and capped at the range. Integer dimensions are evaluated on unit cells around the
/// grid points. The returned point is the best of candidates_per_suggest
/// draws from l by log l(x) - log g(x).
///
/// The random stream is seeded from (seed, history size), so a resumed run
/// proposes the same points as an uninterrupted one.
class TpeSampler {
 public:
  TpeSampler(SearchSpace space, TpeOptions options);

  TrialParams suggest(const std::vector<TrialRecord>& history) const;

  const SearchSpace& space() const noexcept { return space_; }
  const TpeOptions& options() const noexcept { return options_; }

 private:
  SearchSpace space_;
  TpeOptions options_;
};

/// Uniform sample from the space (used during startup and as a baseline).
TrialParams sample_uniform(const SearchSpace& space, std::uint64_t seed);

}  // namespace anntune
