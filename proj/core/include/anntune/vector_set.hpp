#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace anntune {

using NodeId = std::uint32_t;

/// Dense row-major float matrix holding a database, a query batch, or a
/// reduced projection of either. Immutable after construction.
///
/// `ids` is present once a set has been subsampled or reordered and maps each row back to
/// its id in the original database.
class VectorSet {
 public:
  VectorSet() = default;

  /// Validates the invariants: values.size() == count * dim, every value
  /// finite, ids (if any) one per row and distinct. dim may be zero only
  /// when count is zero. Throws ArgumentError.
  VectorSet(std::size_t count, std::size_t dim, std::vector<float> values,
            std::optional<std::vector<NodeId>> ids = std::nullopt);

  std::size_t count() const noexcept { return count_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return count_ == 0; }

  std::span<const float> row(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const float> values() const noexcept { return values_; }

  bool has_ids() const noexcept { return ids_.has_value(); }
  const std::optional<std::vector<NodeId>>& ids() const noexcept { return ids_; }

  /// Original database id of row i (i itself when no id map is attached).
  NodeId original_id(std::size_t i) const noexcept {
    return ids_ ? (*ids_)[i] : static_cast<NodeId>(i);
  }

  /// Rows selected by `rows`, in the given order. Ids are composed so the
  /// result still maps back to the original database.
  VectorSet select_rows(std::span<const NodeId> rows) const;

  friend bool operator==(const VectorSet&, const VectorSet&) = default;

 private:
  std::size_t count_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> values_;
  std::optional<std::vector<NodeId>> ids_;
};

/// k results of one query, ascending by (distance, id). Distances are
/// squared L2.
struct NeighborList {
  std::vector<NodeId> ids;
  std::vector<float> distances;

  std::size_t size() const noexcept { return ids.size(); }
  friend bool operator==(const NeighborList&, const NeighborList&) = default;
};

/// Column means accumulated in double, rows visited in ascending order.
std::vector<double> column_means(const VectorSet& vs);

}  // namespace anntune
