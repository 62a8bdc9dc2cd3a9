#include "commands.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "anntune/antihub.hpp"
#include "anntune/errors.hpp"
#include "anntune/fvecs.hpp"
#include "anntune/index_io.hpp"
#include "anntune/knn.hpp"
#include "anntune/metrics.hpp"
#include "anntune/parallel.hpp"
#include "anntune/pareto.hpp"
#include "anntune/pipeline.hpp"
#include "anntune/synthetic.hpp"
#include "anntune/tuner.hpp"
#include "artifacts.hpp"

namespace anntune::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  int threads = 0;
  std::string config;
};

struct GenerateOptions {
  std::size_t n = 10000;
  std::size_t dim = 16;
  std::size_t queries = 100;
  std::size_t blobs = 16;
  double anisotropy = 0.9;
  std::uint64_t seed = 1;
  std::size_t k = 10;
  std::string out = ".";
};

struct SubsampleOptions {
  std::string database;
  double alpha = 1.0;
  std::size_t k_hub = 10;
  std::string out;
  std::string kept_ids;
};

// Pipeline parameters shared by build and tune.
struct BuildOptions {
  std::size_t d = 0;
  double alpha = 1.0;
  std::size_t entry_clusters = 1;
  std::size_t max_degree = 32;
  std::size_t build_pool = 64;
  std::size_t knn_neighbors = 32;
  std::size_t k_hub = 10;
  std::size_t kmeans_iters = 25;
  std::uint64_t seed = 0;
  std::string order = "subsample-first";

  PipelineParams pipeline() const {
    PipelineParams p;
    p.d = d;
    p.alpha = alpha;
    p.num_clusters = entry_clusters;
    p.k_hub = k_hub;
    p.kmeans_iters = kmeans_iters;
    p.graph.max_degree = max_degree;
    p.graph.build_pool = build_pool;
    p.graph.knn_neighbors = knn_neighbors;
    p.graph.seed = seed;
    p.order = order == "pca-first" ? StageOrder::kPcaThenSubsample : StageOrder::kSubsampleThenPca;
    return p;
  }
};

struct SearchOptions {
  std::string index;
  std::string queries;
  std::string groundtruth;
  std::string out;
  std::string csv;
  std::size_t k = 10;
  std::size_t pool_size = 100;
  std::size_t repeats = kDefaultQpsRepeats;
};

struct TuneOptions {
  std::string database;
  std::string mode = "constrained";
  std::size_t budget = 30;
  std::string history;
  std::string report;
  double recall_threshold = 0.9;
  std::uint64_t tpe_seed = 0;
  std::size_t d_min = 0;
  std::size_t d_max = 0;
  double alpha_min = 0.5;
  double alpha_max = 1.0;
  std::size_t clusters_min = 1;
  std::size_t clusters_max = 64;
};

struct ReportOptions {
  std::vector<std::string> csv;
  std::vector<std::string> history;
  std::string format = "json";
  std::string out;
  double recall_threshold = 0.9;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

void require_file(const std::string& what, const std::string& path) {
  if (path.empty()) throw ArgumentError("--" + what + " is required");
  if (!fs::exists(path)) throw IoError(what + " file not found: " + path);
}

std::string label_of(const std::string& path) { return fs::path(path).filename().string(); }

// Config file keys are the long option names without dashes. A key applies
// to the running subcommand only when the flag was not given on the command
// line. Keys unknown to every subcommand are rejected.
void apply_config(CLI::App& app, CLI::App& sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw FormatError("config " + path + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    const std::string flag = "--" + item.name;
    if (CLI::Option* opt = sub.get_option_no_throw(flag)) {
      if (opt->count() == 0) {
        opt->clear();
        opt->add_result(item.inputs);
        opt->run_callback();
      }
      continue;
    }
    bool known = app.get_option_no_throw(flag) != nullptr;
    for (const CLI::App* other : app.get_subcommands({})) {
      known = known || other->get_option_no_throw(flag) != nullptr;
    }
    if (!known) throw ArgumentError("config " + path + ": unknown key '" + item.name + "'");
  }
}

void add_build_options(CLI::App* sub, BuildOptions& o) {
  sub->add_option("--d", o.d, "PCA target dimension (0 or source dim: no PCA)");
  sub->add_option("--alpha", o.alpha, "Fraction kept by antihub removal")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--entry_clusters", o.entry_clusters, "k-means clusters for entry selection (0: none)");
  sub->add_option("--max_degree", o.max_degree, "Graph out-degree bound")->check(CLI::PositiveNumber);
  sub->add_option("--build_pool", o.build_pool, "Candidate search width during build")->check(CLI::PositiveNumber);
  sub->add_option("--knn_neighbors", o.knn_neighbors, "Degree of the build-time kNN graph")->check(CLI::PositiveNumber);
  sub->add_option("--k_hub", o.k_hub, "Neighbours counted for hubness")->check(CLI::PositiveNumber);
  sub->add_option("--kmeans_iters", o.kmeans_iters, "Lloyd iteration cap")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o.seed, "Build seed");
  sub->add_option("--order", o.order, "Stage order")->check(CLI::IsMember({"subsample-first", "pca-first"}));
}

void add_search_options(CLI::App* sub, SearchOptions& o) {
  sub->add_option("--k", o.k, "Neighbours per query")->check(CLI::PositiveNumber);
  sub->add_option("--pool_size", o.pool_size, "Search pool width (>= k)")->check(CLI::PositiveNumber);
}

nlohmann::json build_meta(const BuildOptions& o, const VectorSet& base) {
  return {{"d", o.d},
          {"alpha", o.alpha},
          {"entry_clusters", o.entry_clusters},
          {"max_degree", o.max_degree},
          {"build_pool", o.build_pool},
          {"knn_neighbors", o.knn_neighbors},
          {"k_hub", o.k_hub},
          {"kmeans_iters", o.kmeans_iters},
          {"seed", o.seed},
          {"order", o.order},
          {"source_count", base.count()},
          {"source_dim", base.dim()}};
}

// ---------------------------------------------------------------------------

void cmd_generate(const GenerateOptions& o) {
  if (o.k > o.n) {
    throw ArgumentError("k=" + std::to_string(o.k) + " exceeds database size n=" + std::to_string(o.n));
  }
  if (o.queries == 0) throw ArgumentError("--queries must be positive");
  // Database and queries come from one draw so they share the mixture.
  const VectorSet all = generate_synthetic(o.n + o.queries, o.dim, o.blobs, o.anisotropy, o.seed);
  const auto values = all.values();
  const VectorSet base(o.n, o.dim, {values.begin(), values.begin() + static_cast<std::ptrdiff_t>(o.n * o.dim)});
  const VectorSet queries(o.queries, o.dim,
                          {values.begin() + static_cast<std::ptrdiff_t>(o.n * o.dim), values.end()});
  const fs::path dir(o.out);
  fs::create_directories(dir);
  save_fvecs(base, dir / "database.fvecs");
  save_fvecs(queries, dir / "queries.fvecs");
  save_neighbors(dir / "groundtruth.json", brute_force_knn(base, queries, o.k), o.k);
  std::cout << nlohmann::json{{"database", (dir / "database.fvecs").string()},
                              {"queries", (dir / "queries.fvecs").string()},
                              {"groundtruth", (dir / "groundtruth.json").string()}}
                   .dump()
            << "\n";
}

void cmd_subsample(const SubsampleOptions& o) {
  require_file("database", o.database);
  if (o.out.empty() && o.kept_ids.empty()) throw ArgumentError("give --out and/or --kept_ids");
  const VectorSet base = load_fvecs(o.database);
  const HubnessProfile profile = k_occurrence(base, o.k_hub);
  const auto rows = antihub_keep_rows(profile, o.alpha);
  if (!o.out.empty()) {
    const VectorSet kept = base.select_rows(rows);
    save_fvecs(VectorSet(kept.count(), kept.dim(), {kept.values().begin(), kept.values().end()}), o.out);
  }
  if (!o.kept_ids.empty()) write_text(o.kept_ids, nlohmann::json(rows).dump() + "\n");
  std::cerr << "kept " << rows.size() << " of " << base.count() << "\n";
}

void cmd_build(const BuildOptions& o, const std::string& database, const std::string& index) {
  require_file("database", database);
  if (index.empty()) throw ArgumentError("--index is required");
  const VectorSet base = load_fvecs(database);
  PipelineTimings timings;
  const Pipeline p = build_pipeline(base, o.pipeline(), nullptr, &timings);
  save_pipeline(p, build_meta(o, base), index);
  std::cerr << "built " << index << " in " << timings.total() << " s\n";
}

void cmd_search(const SearchOptions& o) {
  require_file("index", o.index);
  require_file("queries", o.queries);
  const LoadedPipeline loaded = load_pipeline(o.index);
  const VectorSet queries = load_fvecs(o.queries);
  const auto results = loaded.pipeline.search(queries, SearchParams{o.k, o.pool_size, {}});
  if (o.out.empty()) {
    std::cout << nlohmann::json{{"k", o.k},
                                {"ids", [&] {
                                   std::vector<std::vector<NodeId>> ids;
                                   for (const auto& nl : results) ids.push_back(nl.ids);
                                   return ids;
                                 }()}}
                     .dump()
              << "\n";
  } else {
    save_neighbors(o.out, results, o.k);
  }
}

void cmd_bench(const SearchOptions& o) {
  require_file("index", o.index);
  require_file("queries", o.queries);
  require_file("groundtruth", o.groundtruth);
  if (o.repeats == 0) throw ArgumentError("--repeats must be positive");
  const LoadedPipeline loaded = load_pipeline(o.index);
  const Pipeline& p = loaded.pipeline;
  const VectorSet queries = load_fvecs(o.queries);
  const auto truth = load_neighbors(o.groundtruth);
  const SearchParams sp{o.k, o.pool_size, {}};

  BenchReport report;
  report.k = o.k;
  report.repeats = o.repeats;
  report.recall_at_k = recall_at_k(truth, p.search(queries, sp), o.k);
  report.qps = measure_qps([&](const VectorSet& q) { (void)p.search(q, sp); }, queries, o.repeats);
  report.memory_bytes = p.memory_bytes();
  write_text(o.out, nlohmann::json(report).dump(2) + "\n");

  if (!o.csv.empty()) {
    BenchRow row;
    row.label = label_of(o.index);
    row.d = p.index.dim();
    row.alpha = loaded.meta.value("alpha", 1.0);
    row.entry_clusters = p.selector ? p.selector->num_clusters() : 0;
    row.max_degree = p.index.max_degree();
    row.pool_size = o.pool_size;
    row.k = o.k;
    row.repeats = o.repeats;
    row.recall_at_k = report.recall_at_k;
    row.qps = report.qps;
    row.memory_bytes = report.memory_bytes;
    append_bench_csv(o.csv, {row});
  }
}

void cmd_tune(const TuneOptions& t, const BuildOptions& b, const SearchOptions& s) {
  require_file("database", t.database);
  require_file("queries", s.queries);
  require_file("groundtruth", s.groundtruth);
  if (t.budget == 0) throw ArgumentError("--budget must be at least 1");
  const VectorSet base = load_fvecs(t.database);
  const VectorSet queries = load_fvecs(s.queries);
  const auto truth = load_neighbors(s.groundtruth);

  SearchSpace space = SearchSpace::defaults_for(base.dim());
  if (t.d_min != 0) space.d_min = t.d_min;
  if (t.d_max != 0) space.d_max = t.d_max;
  space.alpha_min = t.alpha_min;
  space.alpha_max = t.alpha_max;
  space.clusters_min = t.clusters_min;
  space.clusters_max = t.clusters_max;
  space.validate();

  EvalConfig cfg;
  cfg.pipeline = b.pipeline();
  cfg.search = SearchParams{s.k, s.pool_size, {}};
  cfg.repeats = s.repeats;
  cfg.recall_threshold = t.recall_threshold;

  std::optional<HubnessProfile> profile;
  if (space.alpha_min < 1.0 && cfg.pipeline.order == StageOrder::kSubsampleThenPca) {
    profile = k_occurrence(base, cfg.pipeline.k_hub);
  }

  std::vector<TrialRecord> prior;
  if (!t.history.empty()) prior = load_history(t.history);
  if (!prior.empty()) std::cerr << "resuming after " << prior.size() << " recorded trials\n";

  TunerOptions opt;
  opt.tpe.seed = t.tpe_seed;
  opt.tpe.recall_threshold = t.recall_threshold;
  opt.on_trial = [&](const TrialRecord& r) {
    if (!t.history.empty()) append_history(t.history, r);
    std::cerr << "trial " << r.trial_index << " d=" << r.params.d << " alpha=" << r.params.alpha
              << " clusters=" << r.params.num_clusters << " recall=" << r.recall << " qps=" << r.qps
              << (r.failed ? " FAILED: " + r.error : "") << "\n";
  };
  const Evaluator eval = [&](const TrialParams& params, std::size_t) {
    return evaluate_trial(params, base, queries, truth, cfg, profile ? &*profile : nullptr).record;
  };
  const bool multi = t.mode == "multi";
  const TuningResult result = multi ? optimize_multi(t.budget, space, eval, opt, std::move(prior))
                                    : optimize_constrained(t.budget, space, eval, opt, std::move(prior));
  nlohmann::json report = tuning_report(result, multi ? TuneMode::kMulti : TuneMode::kConstrained);
  report["search_space"] = space;
  report["pool_size"] = s.pool_size;
  report["k"] = s.k;
  write_text(t.report, report.dump(2) + "\n");
}

void cmd_report(const ReportOptions& o) {
  if (o.csv.empty() && o.history.empty()) throw ArgumentError("give at least one --csv or --history");
  std::vector<BenchRow> rows;
  for (const auto& path : o.csv) {
    require_file("csv", path);
    auto part = read_bench_csv(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::vector<TrialRecord> trials;
  for (const auto& path : o.history) {
    require_file("history", path);
    auto part = load_history(path);
    trials.insert(trials.end(), part.begin(), part.end());
  }

  if (o.format == "csv") {
    std::string text = std::string(kBenchCsvHeader) + "\n";
    for (const auto& r : rows) text += to_csv_line(r) + "\n";
    write_text(o.out, text);
    return;
  }

  nlohmann::json bench = nlohmann::json::array();
  for (const auto& r : rows) {
    bench.push_back({{"label", r.label},
                     {"d", r.d},
                     {"alpha", r.alpha},
                     {"entry_clusters", r.entry_clusters},
                     {"max_degree", r.max_degree},
                     {"pool_size", r.pool_size},
                     {"k", r.k},
                     {"repeats", r.repeats},
                     {"recall_at_k", r.recall_at_k},
                     {"qps", r.qps},
                     {"memory_bytes", r.memory_bytes}});
  }
  std::optional<TrialRecord> best;
  const TrialRecord* best_feasible = nullptr;
  for (const auto& r : trials) {
    if (!r.failed && r.recall >= o.recall_threshold && (best_feasible == nullptr || r.qps > best_feasible->qps)) {
      best_feasible = &r;
    }
  }
  if (best_feasible != nullptr) best = *best_feasible;

  if (o.format == "markdown") {
    std::ostringstream md;
    if (!rows.empty()) {
      md << "| label | d | alpha | entry_clusters | pool_size | recall@k | qps | memory_bytes |\n"
         << "|---|---|---|---|---|---|---|---|\n";
      for (const auto& r : rows) {
        md << "| " << r.label << " | " << r.d << " | " << r.alpha << " | " << r.entry_clusters << " | "
           << r.pool_size << " | " << r.recall_at_k << " | " << r.qps << " | " << r.memory_bytes << " |\n";
      }
    }
    if (!trials.empty()) {
      md << "\n" << trials.size() << " trials, " << pareto_front(trials).size() << " on the Pareto front\n";
      if (best) md << "best feasible: trial " << best->trial_index << ", qps " << best->qps << "\n";
    }
    write_text(o.out, md.str());
    return;
  }

  nlohmann::json j;
  j["bench"] = bench;
  j["trials"] = trials.size();
  j["pareto"] = pareto_front(trials);
  j["best_feasible"] = best ? nlohmann::json(*best) : nlohmann::json(nullptr);
  write_text(o.out, j.dump(2) + "\n");
}

void emit_error(const char* kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Tune and benchmark graph-based nearest-neighbour search pipelines."};
  app.require_subcommand(1);
  GlobalOptions global;
  app.add_option("--threads", global.threads, "Worker thread cap (0: runtime default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--config", global.config, "TOML/INI file of option values; flags win");
  app.fallthrough();

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic database, queries and ground truth");
  generate->add_option("--n", gen.n, "Database vectors")->check(CLI::PositiveNumber);
  generate->add_option("--dim", gen.dim, "Dimension")->check(CLI::PositiveNumber);
  generate->add_option("--queries", gen.queries, "Query vectors");
  generate->add_option("--blobs", gen.blobs, "Mixture components")->check(CLI::PositiveNumber);
  generate->add_option("--anisotropy", gen.anisotropy, "Per-axis variance decay ratio")->check(CLI::Range(0.0, 1.0));
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--k", gen.k, "Ground-truth neighbours per query")->check(CLI::PositiveNumber);
  generate->add_option("--out", gen.out, "Output directory");

  SubsampleOptions sub;
  auto* subsample = app.add_subcommand("subsample", "Antihub removal on an fvecs database");
  subsample->add_option("--database", sub.database, "Input fvecs");
  subsample->add_option("--alpha", sub.alpha, "Fraction to keep")->check(CLI::Range(0.0, 1.0));
  subsample->add_option("--k_hub", sub.k_hub, "Neighbours counted for hubness")->check(CLI::PositiveNumber);
  subsample->add_option("--out", sub.out, "Kept vectors as fvecs");
  subsample->add_option("--kept_ids", sub.kept_ids, "Kept row ids as a JSON array");

  BuildOptions build_opt;
  std::string build_db, build_index_path;
  auto* build = app.add_subcommand("build", "Build a pipeline and write one index file");
  build->add_option("--database", build_db, "Input fvecs");
  build->add_option("--index", build_index_path, "Output index file");
  add_build_options(build, build_opt);

  SearchOptions search_opt;
  auto* search = app.add_subcommand("search", "Query an index file");
  search->add_option("--index", search_opt.index, "Index file");
  search->add_option("--queries", search_opt.queries, "Query fvecs");
  search->add_option("--out", search_opt.out, "Results JSON (default: stdout)");
  add_search_options(search, search_opt);

  SearchOptions bench_opt;
  auto* bench = app.add_subcommand("bench", "Measure recall and QPS of an index file");
  bench->add_option("--index", bench_opt.index, "Index file");
  bench->add_option("--queries", bench_opt.queries, "Query fvecs");
  bench->add_option("--groundtruth", bench_opt.groundtruth, "Ground-truth JSON");
  bench->add_option("--out", bench_opt.out, "BenchReport JSON (default: stdout)");
  bench->add_option("--csv", bench_opt.csv, "Append a row to this CSV");
  bench->add_option("--repeats", bench_opt.repeats, "Timed passes")->check(CLI::PositiveNumber);
  add_search_options(bench, bench_opt);

  TuneOptions tune_opt;
  BuildOptions tune_build;
  SearchOptions tune_search;
  auto* tune = app.add_subcommand("tune", "Search (d, alpha, entry_clusters) with TPE");
  tune->add_option("--database", tune_opt.database, "Database fvecs");
  tune->add_option("--queries", tune_search.queries, "Query fvecs");
  tune->add_option("--groundtruth", tune_search.groundtruth, "Ground-truth JSON");
  tune->add_option("--mode", tune_opt.mode, "Objective")->check(CLI::IsMember({"constrained", "multi"}));
  tune->add_option("--budget", tune_opt.budget, "Total trials including resumed ones");
  tune->add_option("--history", tune_opt.history, "JSONL trial history; resumed if present");
  tune->add_option("--report", tune_opt.report, "Report JSON (default: stdout)");
  tune->add_option("--recall_threshold", tune_opt.recall_threshold, "Feasibility bound on recall")
      ->check(CLI::Range(0.0, 1.0));
  tune->add_option("--tpe_seed", tune_opt.tpe_seed, "Sampler seed");
  tune->add_option("--d_min", tune_opt.d_min, "Lowest PCA dimension (default: dim/8)");
  tune->add_option("--d_max", tune_opt.d_max, "Highest PCA dimension (default: dim)");
  tune->add_option("--alpha_min", tune_opt.alpha_min)->check(CLI::Range(0.0, 1.0));
  tune->add_option("--alpha_max", tune_opt.alpha_max)->check(CLI::Range(0.0, 1.0));
  tune->add_option("--clusters_min", tune_opt.clusters_min);
  tune->add_option("--clusters_max", tune_opt.clusters_max);
  tune->add_option("--repeats", tune_search.repeats, "Timed passes per trial")->check(CLI::PositiveNumber);
  add_build_options(tune, tune_build);
  add_search_options(tune, tune_search);

  ReportOptions rep;
  auto* report = app.add_subcommand("report", "Merge bench CSVs and trial histories");
  report->add_option("--csv", rep.csv, "Bench CSV files");
  report->add_option("--history", rep.history, "Trial history JSONL files");
  report->add_option("--format", rep.format)->check(CLI::IsMember({"json", "csv", "markdown"}));
  report->add_option("--out", rep.out, "Output file (default: stdout)");
  report->add_option("--recall_threshold", rep.recall_threshold)->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    if (!global.config.empty()) apply_config(app, *active, global.config);
    set_thread_count(global.threads);

    if (active == generate) {
      cmd_generate(gen);
    } else if (active == subsample) {
      cmd_subsample(sub);
    } else if (active == build) {
      cmd_build(build_opt, build_db, build_index_path);
    } else if (active == search) {
      cmd_search(search_opt);
    } else if (active == bench) {
      cmd_bench(bench_opt);
    } else if (active == tune) {
      cmd_tune(tune_opt, tune_build, tune_search);
    } else if (active == report) {
      cmd_report(rep);
    }
  } catch (const StageError& e) {
    emit_error("stage", e.what());
    return 5;
  } catch (const FormatError& e) {
    emit_error("format", e.what());
    return 4;
  } catch (const IoError& e) {
    emit_error("io", e.what());
    return 3;
  } catch (const ArgumentError& e) {
    emit_error("argument", e.what());
    return 2;
  } catch (const CLI::Error& e) {
    emit_error("argument", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace anntune::cli
