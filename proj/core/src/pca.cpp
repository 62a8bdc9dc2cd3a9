#include "anntune/pca.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "anntune/errors.hpp"

namespace anntune {

PcaModel::PcaModel(std::vector<float> mean, std::vector<float> basis,
                   std::vector<float> eigenvalues, std::size_t d0, std::size_t d)
    : mean_(std::move(mean)),
      basis_(std::move(basis)),
      eigenvalues_(std::move(eigenvalues)),
      d0_(d0),
      d_(d) {
  if (d_ < 1 || d_ > d0_) throw ArgumentError("PcaModel: need 1 <= d <= d0");
  if (mean_.size() != d0_ || basis_.size() != d0_ * d_ || eigenvalues_.size() != d_) {
    throw ArgumentError("PcaModel: inconsistent array sizes");
  }
  components_.resize(d_ * d0_);
  for (std::size_t r = 0; r < d0_; ++r) {
    for (std::size_t c = 0; c < d_; ++c) components_[c * d0_ + r] = basis_[r * d_ + c];
  }
}

void PcaModel::project(std::span<const float> x, std::span<float> out) const noexcept {
  // Centre once, then one contiguous dot product per component.
  float centred_small[512];
  std::vector<float> centred_big;
  float* centred = centred_small;
  if (d0_ > 512) {
    centred_big.resize(d0_);
    centred = centred_big.data();
  }
  for (std::size_t j = 0; j < d0_; ++j) centred[j] = x[j] - mean_[j];
  for (std::size_t c = 0; c < d_; ++c) {
    const float* comp = components_.data() + c * d0_;
    float acc = 0.0f;
    for (std::size_t j = 0; j < d0_; ++j) acc += comp[j] * centred[j];
    out[c] = acc;
  }
}

PcaModel pca_fit(const VectorSet& base, std::size_t d) {
  const std::size_t n = base.count();
  const std::size_t d0 = base.dim();
  if (n < 2) throw ArgumentError("pca_fit: need at least 2 vectors");
  if (d < 1 || d > d0) {
    throw ArgumentError("pca_fit: target dimension " + std::to_string(d) + " outside [1, " +
                        std::to_string(d0) + "]");
  }

  const std::vector<double> mean = column_means(base);
  Eigen::MatrixXd centred(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d0));
  for (std::size_t i = 0; i < n; ++i) {
    auto r = base.row(i);
    for (std::size_t j = 0; j < d0; ++j) {
      centred(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[j] - mean[j];
    }
  }
  Eigen::MatrixXd cov = centred.transpose() * centred;
  cov /= static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw ArgumentError("pca_fit: eigendecomposition failed");
  // Eigen returns ascending eigenvalues.
  const Eigen::VectorXd& values = solver.eigenvalues();
  const Eigen::MatrixXd& vectors = solver.eigenvectors();

  std::vector<float> basis(d0 * d);
  std::vector<float> eig(d);
  for (std::size_t c = 0; c < d; ++c) {
    const auto src = static_cast<Eigen::Index>(d0 - 1 - c);
    eig[c] = static_cast<float>(std::max(values(src), 0.0));
    Eigen::Index arg = 0;
    for (Eigen::Index r = 1; r < static_cast<Eigen::Index>(d0); ++r) {
      if (std::abs(vectors(r, src)) > std::abs(vectors(arg, src))) arg = r;
    }
    const double sign = vectors(arg, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < d0; ++r) {
      basis[r * d + c] = static_cast<float>(sign * vectors(static_cast<Eigen::Index>(r), src));
    }
  }
  return PcaModel(std::vector<float>(mean.begin(), mean.end()), std::move(basis),
                  std::move(eig), d0, d);
}

VectorSet pca_transform(const PcaModel& model, const VectorSet& vs) {
  if (vs.count() > 0 && vs.dim() != model.d0()) {
    throw ArgumentError("pca_transform: input dim " + std::to_string(vs.dim()) +
                        " != model d0 " + std::to_string(model.d0()));
  }
  std::vector<float> out(vs.count() * model.d());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(vs.count()); ++i) {
    const auto row = static_cast<std::size_t>(i);
    model.project(vs.row(row), std::span<float>(out.data() + row * model.d(), model.d()));
  }
  return VectorSet(vs.count(), model.d(), std::move(out), vs.ids());
}

}  // namespace anntune
