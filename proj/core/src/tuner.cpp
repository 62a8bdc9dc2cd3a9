#include "anntune/tuner.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "anntune/errors.hpp"
#include "anntune/pareto.hpp"

namespace anntune {

namespace {

using Clock = std::chrono::steady_clock;

TrialRecord run_one(const Evaluator& evaluator, const TrialParams& params, std::size_t index,
                    double threshold) {
  TrialRecord rec;
  try {
    rec = evaluator(params, index);
  } catch (const std::exception& e) {
    rec = TrialRecord{};
    rec.failed = true;
    rec.error = e.what();
  }
  rec.params = params;
  rec.trial_index = index;
  if (rec.failed) {
    rec.recall = 0.0;
    rec.qps = 0.0;
  }
  rec.feasible = !rec.failed && rec.recall >= threshold;
  return rec;
}

TuningResult optimize(std::size_t budget, const SearchSpace& bounds, const Evaluator& evaluator,
                      TunerOptions options, std::vector<TrialRecord> prior, TuneMode mode) {
  if (budget < 1) throw ArgumentError("optimize: budget must be at least 1");
  bounds.validate();
  options.tpe.mode = mode;
  const auto t0 = Clock::now();
  const TpeSampler sampler(bounds, options.tpe);

  TuningResult result;
  result.history = std::move(prior);
  if (result.history.size() > budget) result.history.resize(budget);
  while (result.history.size() < budget) {
    const TrialParams params = sampler.suggest(result.history);
    TrialRecord rec = run_one(evaluator, params, result.history.size(), options.tpe.recall_threshold);
    if (options.on_trial) options.on_trial(rec);
    result.history.push_back(std::move(rec));
  }
  result.best = best_constrained(result.history);
  result.pareto = pareto_front(result.history);
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return result;
}

}  // namespace

TrialEvaluation evaluate_trial(const TrialParams& params, const VectorSet& database,
                               const VectorSet& queries,
                               const std::vector<NeighborList>& ground_truth,
                               const EvalConfig& config, const HubnessProfile* profile) {
  TrialEvaluation out;
  TrialRecord& rec = out.record;
  rec.params = params;
  try {
    if (ground_truth.size() != queries.count()) {
      throw StageError("evaluate", "ground truth does not match the query count");
    }
    PipelineParams pp = config.pipeline;
    pp.d = params.d;
    pp.alpha = params.alpha;
    pp.num_clusters = params.num_clusters;

    PipelineTimings timings;
    const Pipeline pipeline = build_pipeline(database, pp, profile, &timings);
    rec.build_seconds = timings.total();
    rec.memory_bytes = pipeline.memory_bytes();

    out.results = pipeline.search(queries, config.search);
    rec.recall = recall_at_k(ground_truth, out.results, config.search.k);
    rec.qps = measure_qps([&](const VectorSet& q) { (void)pipeline.search(q, config.search); },
                          queries, config.repeats);
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
    rec.recall = 0.0;
    rec.qps = 0.0;
    out.results.clear();
  }
  rec.feasible = !rec.failed && rec.recall >= config.recall_threshold;
  return out;
}

std::optional<TrialRecord> best_constrained(const std::vector<TrialRecord>& history) {
  const TrialRecord* best_feasible = nullptr;
  const TrialRecord* best_recall = nullptr;
  for (const TrialRecord& r : history) {
    if (r.failed) continue;
    if (r.feasible && (best_feasible == nullptr || r.qps > best_feasible->qps)) best_feasible = &r;
    if (best_recall == nullptr || r.recall > best_recall->recall ||
        (r.recall == best_recall->recall && r.qps > best_recall->qps)) {
      best_recall = &r;
    }
  }
  if (best_feasible != nullptr) return *best_feasible;
  if (best_recall != nullptr) return *best_recall;
  if (!history.empty()) return history.front();
  return std::nullopt;
}

TuningResult optimize_constrained(std::size_t budget, const SearchSpace& bounds,
                                  const Evaluator& evaluator, TunerOptions options,
                                  std::vector<TrialRecord> prior) {
  return optimize(budget, bounds, evaluator, std::move(options), std::move(prior),
                  TuneMode::kConstrained);
}

TuningResult optimize_multi(std::size_t budget, const SearchSpace& bounds,
                            const Evaluator& evaluator, TunerOptions options,
                            std::vector<TrialRecord> prior) {
  return optimize(budget, bounds, evaluator, std::move(options), std::move(prior),
                  TuneMode::kMulti);
}

void append_history(const std::filesystem::path& path, const TrialRecord& record) {
  const std::string line = nlohmann::json(record).dump() + "\n";
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot open " + path.string() + " for appending");
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) throw IoError("append failed: " + path.string());
}

std::vector<TrialRecord> load_history(const std::filesystem::path& path) {
  std::vector<TrialRecord> records;
  if (!std::filesystem::exists(path)) return records;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  in.close();

  std::size_t pos = 0;
  std::size_t good_end = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    ++line_no;
    if (nl == std::string::npos) break;  // unterminated tail
    const std::string line = text.substr(pos, nl - pos);
    if (!line.empty()) {
      try {
        records.push_back(nlohmann::json::parse(line).get<TrialRecord>());
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    pos = nl + 1;
    good_end = pos;
  }
  if (good_end < text.size()) std::filesystem::resize_file(path, good_end);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].trial_index != i) {
      throw FormatError(path.string() + ": trial indices are not consecutive at line " +
                        std::to_string(i + 1));
    }
  }
  return records;
}

nlohmann::json tuning_report(const TuningResult& result, TuneMode mode) {
  nlohmann::json j;
  j["mode"] = mode == TuneMode::kConstrained ? "constrained" : "multi";
  j["trials"] = result.history.size();
  j["best"] = result.best ? nlohmann::json(*result.best) : nlohmann::json(nullptr);
  j["pareto"] = result.pareto;
  double build_total = 0.0;
  std::size_t failed = 0;
  std::size_t feasible = 0;
  for (const auto& r : result.history) {
    build_total += r.build_seconds;
    failed += r.failed ? 1 : 0;
    feasible += r.feasible ? 1 : 0;
  }
  j["failed_trials"] = failed;
  j["feasible_trials"] = feasible;
  j["build_seconds_total"] = build_total;
  j["wall_seconds"] = result.wall_seconds;
  return j;
}

}  // namespace anntune
