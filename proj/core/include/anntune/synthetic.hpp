#pragma once

#include <cstddef>
#include <cstdint>

#include "anntune/vector_set.hpp"

namespace anntune {

/// Gaussian mixture with `num_blobs` well-separated means.
///
/// Axis j has standard deviation `anisotropy^(j/2)`, i.e. per-axis variances
/// decay geometrically with ratio `anisotropy`: 1 gives an isotropic cloud,
/// smaller values concentrate the variance in the leading axes so PCA has
/// something to find. Blob means are drawn with the same per-axis scale,
/// stretched by a separation factor. Deterministic for a fixed seed.
///
/// Requires n >= num_blobs >= 1, dim >= 1 and anisotropy in [0, 1].
VectorSet generate_synthetic(std::size_t n, std::size_t dim, std::size_t num_blobs,
                             double anisotropy, std::uint64_t seed);

/// Uniform samples from [lo, hi)^dim.
VectorSet generate_uniform(std::size_t n, std::size_t dim, std::uint64_t seed,
                           float lo = 0.0f, float hi = 1.0f);

}  // namespace anntune
