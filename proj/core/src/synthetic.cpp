#include "anntune/synthetic.hpp"

#include <cmath>
#include <random>

#include "anntune/errors.hpp"

namespace anntune {

namespace {
constexpr double kSeparation = 4.0;
}

VectorSet generate_synthetic(std::size_t n, std::size_t dim, std::size_t num_blobs,
                             double anisotropy, std::uint64_t seed) {
  if (num_blobs < 1 || n < num_blobs) {
    throw ArgumentError("generate_synthetic: need n >= num_blobs >= 1");
  }
  if (dim < 1) throw ArgumentError("generate_synthetic: dim must be positive");
  if (!(anisotropy >= 0.0 && anisotropy <= 1.0)) {
    throw ArgumentError("generate_synthetic: anisotropy must lie in [0, 1]");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> scale(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    scale[j] = std::pow(anisotropy, 0.5 * static_cast<double>(j));
  }

  std::vector<double> means(num_blobs * dim);
  for (std::size_t b = 0; b < num_blobs; ++b) {
    for (std::size_t j = 0; j < dim; ++j) {
      means[b * dim + j] = kSeparation * scale[j] * gauss(rng);
    }
  }

  std::uniform_int_distribution<std::size_t> pick(0, num_blobs - 1);
  std::vector<float> values(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i < num_blobs ? i : pick(rng);
    for (std::size_t j = 0; j < dim; ++j) {
      values[i * dim + j] = static_cast<float>(means[b * dim + j] + scale[j] * gauss(rng));
    }
  }
  return VectorSet(n, dim, std::move(values));
}

VectorSet generate_uniform(std::size_t n, std::size_t dim, std::uint64_t seed, float lo,
                           float hi) {
  if (dim < 1) throw ArgumentError("generate_uniform: dim must be positive");
  if (!(lo < hi)) throw ArgumentError("generate_uniform: need lo < hi");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(lo, hi);
  std::vector<float> values(n * dim);
  for (float& v : values) v = u(rng);
  return VectorSet(n, dim, std::move(values));
}

}  // namespace anntune
