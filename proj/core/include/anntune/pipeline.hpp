#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anntune/antihub.hpp"
#include "anntune/entry_point.hpp"
#include "anntune/graph_index.hpp"
#include "anntune/pca.hpp"
#include "anntune/vector_set.hpp"

namespace anntune {

enum class StageOrder { kSubsampleThenPca, kPcaThenSubsample };

/// Everything needed to turn a database into a searchable pipeline.
struct PipelineParams {
  /// PCA target dimension; 0 or the source dimension disables PCA.
  std::size_t d = 0;
  /// Fraction of the database kept by antihub removal; 1 disables it.
  double alpha = 1.0;
  /// k-means clusters for entry selection; 0 searches from the graph's
  /// default entry.
  std::size_t num_clusters = 1;
  std::size_t k_hub = 10;
  std::size_t kmeans_iters = 25;
  BuildParams graph;
  StageOrder order = StageOrder::kSubsampleThenPca;
};

/// Error raised while building or running a pipeline; what() is prefixed
/// with the failing stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct PipelineTimings {
  double subsample_seconds = 0.0;
  double pca_seconds = 0.0;
  double graph_seconds = 0.0;
  double kmeans_seconds = 0.0;
  double total() const { return subsample_seconds + pca_seconds + graph_seconds + kmeans_seconds; }
};

/// Built artifact: optional PCA, the graph over the reduced database, and an
/// optional entry-point selector.
struct Pipeline {
  std::optional<PcaModel> pca;
  GraphIndex index;
  std::optional<EntryPointSelector> selector;

  /// Transforms the queries, searches (grouped by entry when a selector is
  /// present) and maps node ids back to original database ids.
  std::vector<NeighborList> search(const VectorSet& queries, const SearchParams& params) const;

  std::uint64_t memory_bytes() const;
};

/// Runs antihub removal, PCA, graph build and k-means in the configured
/// order. `profile`, when given, must be the hubness profile of `base` and
/// spares recomputing it (only used when subsampling runs first). With more
/// than one cluster the graph nodes are renumbered so each cluster is
/// contiguous; search results are unaffected.
Pipeline build_pipeline(const VectorSet& base, const PipelineParams& params,
                        const HubnessProfile* profile = nullptr,
                        PipelineTimings* timings = nullptr);

}  // namespace anntune
