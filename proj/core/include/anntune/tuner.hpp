#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "anntune/antihub.hpp"
#include "anntune/metrics.hpp"
#include "anntune/pipeline.hpp"
#include "anntune/records.hpp"
#include "anntune/tpe.hpp"

namespace anntune {

/// Fixed (untuned) settings shared by every trial of a run.
struct EvalConfig {
  PipelineParams pipeline;  // d, alpha, num_clusters are overwritten per trial
  SearchParams search;
  std::size_t repeats = kDefaultQpsRepeats;
  double recall_threshold = 0.9;
};

struct TrialEvaluation {
  TrialRecord record;
  /// Per-query results mapped to original database ids.
  std::vector<NeighborList> results;
};

/// Builds the pipeline for `params` over the full `database`, measures
/// Recall@k of grouped search against `ground_truth` (computed on the full
/// database) and QPS over `repeats` timed passes. Any stage failure yields a
/// record with failed = true and the stage error, never an exception.
TrialEvaluation evaluate_trial(const TrialParams& params, const VectorSet& database,
                               const VectorSet& queries,
                               const std::vector<NeighborList>& ground_truth,
                               const EvalConfig& config,
                               const HubnessProfile* profile = nullptr);

/// Maps a parameter point to a measured record. Only recall, qps,
/// memory_bytes, build_seconds and failure fields are read back; the tuner
/// fills in params, trial_index and feasible.
using Evaluator = std::function<TrialRecord(const TrialParams& params, std::size_t trial_index)>;

struct TunerOptions {
  TpeOptions tpe;
  /// Called after each trial (e.g. to append to a history file).
  std::function<void(const TrialRecord&)> on_trial;
};

struct TuningResult {
  /// Constrained: feasible record with max qps, or the max-recall record
  /// (infeasible) when nothing met the threshold.
  std::optional<TrialRecord> best;
  std::vector<TrialRecord> pareto;
  std::vector<TrialRecord> history;
  double wall_seconds = 0.0;
};

/// maximise qps subject to recall >= threshold (soft constraint). Trials in
/// `prior` count against the budget and are not re-run.
TuningResult optimize_constrained(std::size_t budget, const SearchSpace& bounds,
                                  const Evaluator& evaluator, TunerOptions options,
                                  std::vector<TrialRecord> prior = {});

/// maximise (recall, qps); result.pareto is the non-dominated set.
TuningResult optimize_multi(std::size_t budget, const SearchSpace& bounds,
                            const Evaluator& evaluator, TunerOptions options,
                            std::vector<TrialRecord> prior = {});

/// Best record of a constrained run, re-derivable from any history.
std::optional<TrialRecord> best_constrained(const std::vector<TrialRecord>& history);

/// Appends one record as a single JSON line and flushes.
void append_history(const std::filesystem::path& path, const TrialRecord& record);

/// Reads a JSON-lines history. A trailing partial line (interrupted write)
/// is dropped and the file truncated to the last complete record.
std::vector<TrialRecord> load_history(const std::filesystem::path& path);

nlohmann::json tuning_report(const TuningResult& result, TuneMode mode);

}  // namespace anntune
