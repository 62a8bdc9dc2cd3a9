#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "anntune/pipeline.hpp"

namespace anntune {

// Index file layout (little-endian):
//   header   magic "ANNTIDX\0", u32 version, u32 section count,
//            u64 count, u32 dim, u32 max_degree, u32 default_entry,
//            u32 entry, u32 repaired_edges, u32 crc32 of the preceding bytes
//   sections tag[4], u64 payload length, u32 crc32(payload), payload
//     "VECS" count*dim float32
//     "IDS " count u32 (subsampled or cluster-ordered bases)
//     "ADJ " (count+1) u64 offsets, then u32 neighbour ids
//     "PCA " u64 d0, u64 d, mean[d0], basis[d0*d] row-major, eigenvalues[d]
//     "SEL " u64 clusters, u64 dim, means[clusters*dim], u32 ids[clusters]
//     "META" UTF-8 JSON (build parameters)
inline constexpr std::uint32_t kIndexFormatVersion = 1;

void save_pipeline(const Pipeline& pipeline, const nlohmann::json& meta,
                   const std::filesystem::path& path);

struct LoadedPipeline {
  Pipeline pipeline;
  nlohmann::json meta;
};

/// Throws FormatError naming the offending section on corruption, an
/// unknown version or a structural violation; IoError if unreadable.
LoadedPipeline load_pipeline(const std::filesystem::path& path);

}  // namespace anntune
