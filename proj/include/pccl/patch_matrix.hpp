#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pccl {

/// Row-major set of equal-length patch feature vectors.
///
/// Every row has `dim()` components and all components are finite; this is
/// the storage used for memory banks, pooled training patches and the
/// payload of a feature grid.
class PatchMatrix {
public:
  PatchMatrix() = default;
  explicit PatchMatrix(std::size_t dim);
  PatchMatrix(std::size_t dim, std::vector<float> values);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
  bool empty() const noexcept { return values_.empty(); }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const float> values() const noexcept { return values_; }

  void reserve_rows(std::size_t n) { values_.reserve(n * dim_); }
  void append(std::span<const float> v);
  void append_rows(const PatchMatrix& other);

  /// Copy of the given rows, in the order given.
  PatchMatrix select(std::span<const std::size_t> indices) const;

  friend bool operator==(const PatchMatrix&, const PatchMatrix&) = default;

private:
  std::size_t dim_ = 0;
  std::vector<float> values_;
};

/// Squared Euclidean distance accumulated in double precision.
inline double squared_distance(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += diff * diff;
  }
  return acc;
}

} // namespace pccl
