#include "anntune/vector_set.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

#include "anntune/errors.hpp"

namespace anntune {

VectorSet::VectorSet(std::size_t count, std::size_t dim, std::vector<float> values,
                     std::optional<std::vector<NodeId>> ids)
    : count_(count), dim_(dim), values_(std::move(values)), ids_(std::move(ids)) {
  if (dim_ == 0 && count_ != 0) {
    throw ArgumentError("VectorSet: dim must be positive for a non-empty set");
  }
  if (values_.size() != count_ * dim_) {
    throw ArgumentError("VectorSet: expected " + std::to_string(count_ * dim_) +
                        " values, got " + std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw ArgumentError("VectorSet: non-finite value at row " + std::to_string(i / dim_));
    }
  }
  if (ids_) {
    if (ids_->size() != count_) {
      throw ArgumentError("VectorSet: id map length differs from count");
    }
    std::unordered_set<NodeId> seen(ids_->begin(), ids_->end());
    if (seen.size() != ids_->size()) {
      throw ArgumentError("VectorSet: duplicate ids");
    }
  }
}

VectorSet VectorSet::select_rows(std::span<const NodeId> rows) const {
  std::vector<float> out;
  out.reserve(rows.size() * dim_);
  std::vector<NodeId> ids;
  ids.reserve(rows.size());
  for (NodeId r : rows) {
    if (r >= count_) throw ArgumentError("select_rows: row out of range");
    auto v = row(r);
    out.insert(out.end(), v.begin(), v.end());
    ids.push_back(original_id(r));
  }
  return VectorSet(rows.size(), dim_, std::move(out), std::move(ids));
}

std::vector<double> column_means(const VectorSet& vs) {
  std::vector<double> mean(vs.dim(), 0.0);
  for (std::size_t i = 0; i < vs.count(); ++i) {
    auto r = vs.row(i);
    for (std::size_t j = 0; j < vs.dim(); ++j) mean[j] += r[j];
  }
  if (vs.count() > 0) {
    for (double& m : mean) m /= static_cast<double>(vs.count());
  }
  return mean;
}

}  // namespace anntune
