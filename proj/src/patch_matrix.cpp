#include "pccl/patch_matrix.hpp"

#include <cmath>
#include <string>

#include "pccl/errors.hpp"

namespace pccl {

namespace {

void check_finite(std::span<const float> values) {
  for (float v : values)
    if (!std::isfinite(v)) throw InvalidArgument("patch vector has a non-finite component");
}

} // namespace

PatchMatrix::PatchMatrix(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw InvalidArgument("patch dimension must be positive");
}

PatchMatrix::PatchMatrix(std::size_t dim, std::vector<float> values)
    : dim_(dim), values_(std::move(values)) {
  if (dim == 0) throw InvalidArgument("patch dimension must be positive");
  if (values_.size() % dim != 0)
    throw InvalidArgument("value count " + std::to_string(values_.size()) +
                          " is not a multiple of dim " + std::to_string(dim));
  check_finite(values_);
}

void PatchMatrix::append(std::span<const float> v) {
  if (v.size() != dim_)
    throw InvalidArgument("dim mismatch: expected " + std::to_string(dim_) + ", got " +
                          std::to_string(v.size()));
  check_finite(v);
  values_.insert(values_.end(), v.begin(), v.end());
}

void PatchMatrix::append_rows(const PatchMatrix& other) {
  if (other.empty()) return;
  if (other.dim_ != dim_)
    throw InvalidArgument("dim mismatch: expected " + std::to_string(dim_) + ", got " +
                          std::to_string(other.dim_));
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
}

PatchMatrix PatchMatrix::select(std::span<const std::size_t> indices) const {
  PatchMatrix out(dim_);
  out.values_.reserve(indices.size() * dim_);
  for (std::size_t i : indices) {
    auto r = row(i);
    out.values_.insert(out.values_.end(), r.begin(), r.end());
  }
  return out;
}

} // namespace pccl
