#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace anntune {

/// One point of the tuning space: PCA dimension, kept ratio, k-means
/// clusters.
struct TrialParams {
  std::size_t d = 0;
  double alpha = 1.0;
  std::size_t num_clusters = 1;

  friend bool operator==(const TrialParams&, const TrialParams&) = default;
};

struct SearchSpace {
  std::size_t d_min = 1;
  std::size_t d_max = 1;
  double alpha_min = 0.5;
  double alpha_max = 1.0;
  std::size_t clusters_min = 1;
  std::size_t clusters_max = 64;

  /// d in [d0/8, d0], alpha in [0.5, 1], clusters in [1, 64].
  static SearchSpace defaults_for(std::size_t d0);
  /// Throws ArgumentError on empty or inverted ranges.
  void validate() const;
  bool contains(const TrialParams& p) const noexcept;
};

struct TrialRecord {
  TrialParams params;
  double recall = 0.0;
  double qps = 0.0;
  std::uint64_t memory_bytes = 0;
  bool feasible = false;
  double build_seconds = 0.0;
  std::size_t trial_index = 0;
  bool failed = false;
  std::string error;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

void to_json(nlohmann::json& j, const TrialParams& p);
void from_json(const nlohmann::json& j, TrialParams& p);
void to_json(nlohmann::json& j, const TrialRecord& r);
void from_json(const nlohmann::json& j, TrialRecord& r);
void to_json(nlohmann::json& j, const SearchSpace& s);
void from_json(const nlohmann::json& j, SearchSpace& s);

}  // namespace anntune
