#include "anntune/records.hpp"

#include <algorithm>

#include "anntune/errors.hpp"

namespace anntune {

SearchSpace SearchSpace::defaults_for(std::size_t d0) {
  SearchSpace s;
  s.d_min = std::max<std::size_t>(1, d0 / 8);
  s.d_max = d0;
  return s;
}

void SearchSpace::validate() const {
  if (d_min < 1 || d_min > d_max) throw ArgumentError("search space: empty d range");
  if (!(alpha_min > 0.0 && alpha_min <= alpha_max && alpha_max <= 1.0)) {
    throw ArgumentError("search space: alpha range must satisfy 0 < min <= max <= 1");
  }
  if (clusters_min < 1 || clusters_min > clusters_max) {
    throw ArgumentError("search space: empty cluster range");
  }
}

bool SearchSpace::contains(const TrialParams& p) const noexcept {
  return p.d >= d_min && p.d <= d_max && p.alpha >= alpha_min && p.alpha <= alpha_max &&
         p.num_clusters >= clusters_min && p.num_clusters <= clusters_max;
}

void to_json(nlohmann::json& j, const TrialParams& p) {
  j = nlohmann::json{{"d", p.d}, {"alpha", p.alpha}, {"num_clusters", p.num_clusters}};
}

void from_json(const nlohmann::json& j, TrialParams& p) {
  j.at("d").get_to(p.d);
  j.at("alpha").get_to(p.alpha);
  j.at("num_clusters").get_to(p.num_clusters);
}

void to_json(nlohmann::json& j, const TrialRecord& r) {
  j = nlohmann::json{{"trial_index", r.trial_index},
                     {"params", r.params},
                     {"recall", r.recall},
                     {"qps", r.qps},
                     {"memory_bytes", r.memory_bytes},
                     {"feasible", r.feasible},
                     {"build_seconds", r.build_seconds},
                     {"failed", r.failed}};
  if (!r.error.empty()) j["error"] = r.error;
}

void from_json(const nlohmann::json& j, TrialRecord& r) {
  j.at("trial_index").get_to(r.trial_index);
  j.at("params").get_to(r.params);
  j.at("recall").get_to(r.recall);
  j.at("qps").get_to(r.qps);
  j.at("memory_bytes").get_to(r.memory_bytes);
  j.at("feasible").get_to(r.feasible);
  j.at("build_seconds").get_to(r.build_seconds);
  r.failed = j.value("failed", false);
  r.error = j.value("error", std::string{});
}

void to_json(nlohmann::json& j, const SearchSpace& s) {
  j = nlohmann::json{{"d_min", s.d_min},           {"d_max", s.d_max},
                     {"alpha_min", s.alpha_min},   {"alpha_max", s.alpha_max},
                     {"clusters_min", s.clusters_min}, {"clusters_max", s.clusters_max}};
}

void from_json(const nlohmann::json& j, SearchSpace& s) {
  j.at("d_min").get_to(s.d_min);
  j.at("d_max").get_to(s.d_max);
  j.at("alpha_min").get_to(s.alpha_min);
  j.at("alpha_max").get_to(s.alpha_max);
  j.at("clusters_min").get_to(s.clusters_min);
  j.at("clusters_max").get_to(s.clusters_max);
}

}  // namespace anntune
