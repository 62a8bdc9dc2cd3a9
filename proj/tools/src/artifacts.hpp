#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "anntune/vector_set.hpp"

namespace anntune::cli {

/// Neighbour lists as JSON: {"k": k, "ids": [[...]], "distances": [[...]]}.
/// Used for ground truth and for search output.
void save_neighbors(const std::filesystem::path& path, const std::vector<NeighborList>& lists,
                    std::size_t k);
std::vector<NeighborList> load_neighbors(const std::filesystem::path& path);

/// One benchmark measurement, one CSV row.
struct BenchRow {
  std::string label;
  std::size_t d = 0;
  double alpha = 1.0;
  std::size_t entry_clusters = 0;
  std::size_t max_degree = 0;
  std::size_t pool_size = 0;
  std::size_t k = 0;
  std::size_t repeats = 0;
  double recall_at_k = 0.0;
  double qps = 0.0;
  std::uint64_t memory_bytes = 0;

  friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

extern const char* const kBenchCsvHeader;

std::string to_csv_line(const BenchRow& row);
/// Appends rows, writing the header first when the file is new or empty.
void append_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows);
/// Parses a file written by append_bench_csv. Throws FormatError naming the
/// line on malformed input.
std::vector<BenchRow> read_bench_csv(const std::filesystem::path& path);

}  // namespace anntune::cli
