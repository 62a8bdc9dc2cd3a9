#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "anntune/vector_set.hpp"

namespace anntune {

/// Linear projection from d0 to d dimensions: x -> basis^T (x - mean).
///
/// Columns of the basis are the top-d eigenvectors of the sample covariance,
/// orthonormal, each signed so its largest-magnitude entry is non-negative.
/// Eigenvalues are sorted non-increasing and clamped at zero.
class PcaModel {
 public:
  PcaModel() = default;
  PcaModel(std::vector<float> mean, std::vector<float> basis, std::vector<float> eigenvalues,
           std::size_t d0, std::size_t d);

  std::size_t d0() const noexcept { return d0_; }
  std::size_t d() const noexcept { return d_; }
  std::span<const float> mean() const noexcept { return mean_; }
  /// Row-major d0 x d.
  std::span<const float> basis() const noexcept { return basis_; }
  float basis_at(std::size_t row, std::size_t col) const noexcept { return basis_[row * d_ + col]; }
  std::span<const float> eigenvalues() const noexcept { return eigenvalues_; }

  /// Projects one vector of length d0 into `out` (length d).
  void project(std::span<const float> x, std::span<float> out) const noexcept;

  friend bool operator==(const PcaModel&, const PcaModel&) = default;

 private:
  std::vector<float> mean_;
  std::vector<float> basis_;
  std::vector<float> components_;  // d x d0, transposed basis for contiguous dots
  std::vector<float> eigenvalues_;
  std::size_t d0_ = 0;
  std::size_t d_ = 0;
};

/// Fits a PCA model on `base`: column means, then a symmetric
/// eigendecomposition of the (n-1)-normalised covariance.
/// Requires count >= 2 and 1 <= d <= dim. Rank-deficient input is fine; its
/// trailing eigenvalues come out as zero.
PcaModel pca_fit(const VectorSet& base, std::size_t d);

/// Projects every row; ids are carried through unchanged.
VectorSet pca_transform(const PcaModel& model, const VectorSet& vs);

}  // namespace anntune
