#pragma once

#include <cstddef>
#include <span>

namespace anntune {

/// Squared Euclidean distance. Every component that ranks vectors calls this
/// one function so that distances agree bit-for-bit across brute force,
/// graph search and entry-point selection.
float squared_l2(const float* a, const float* b, std::size_t dim) noexcept;

inline float squared_l2(std::span<const float> a, std::span<const float> b) noexcept {
  return squared_l2(a.data(), b.data(), a.size());
}

}  // namespace anntune
