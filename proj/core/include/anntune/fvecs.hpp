#pragma once

#include <filesystem>

#include "anntune/vector_set.hpp"

namespace anntune {

/// Reads the .fvecs layout: each record is a little-endian int32 dimension
/// followed by that many float32 values. An empty file yields an empty set.
/// Throws FormatError (with byte offset or record index) on malformed input
/// and IoError when the file cannot be opened.
VectorSet load_fvecs(const std::filesystem::path& path);

/// Writes `vs` in .fvecs layout. The id map, if any, is not stored.
void save_fvecs(const VectorSet& vs, const std::filesystem::path& path);

}  // namespace anntune
