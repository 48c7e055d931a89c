#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pccl/patch_matrix.hpp"

namespace pccl {

struct ImageGeometry {
  std::uint32_t img_h = 224;
  std::uint32_t img_w = 224;

  std::size_t pixels() const noexcept { return std::size_t{img_h} * img_w; }
  friend bool operator==(const ImageGeometry&, const ImageGeometry&) = default;
};

enum class Label : std::uint8_t { normal = 0, anomalous = 1 };

/// Patch features of one image: a grid_h x grid_w grid of dim-dimensional
/// vectors stored row-major, plus the image label and optional pixel mask.
struct FeatureGrid {
  std::uint64_t image_id = 0;
  std::uint32_t grid_h = 0;
  std::uint32_t grid_w = 0;
  ImageGeometry geometry;
  Label label = Label::normal;
  PatchMatrix patches;
  /// img_h * img_w entries, 1 = anomalous pixel.
  std::optional<std::vector<std::uint8_t>> mask;

  std::uint32_t dim() const noexcept { return static_cast<std::uint32_t>(patches.dim()); }
  std::size_t cells() const noexcept { return std::size_t{grid_h} * grid_w; }
  std::span<const float> patch(std::uint32_t y, std::uint32_t x) const {
    return patches.row(std::size_t{y} * grid_w + x);
  }

  /// Throws InvalidArgument if the data length or mask size is inconsistent.
  void validate() const;

  friend bool operator==(const FeatureGrid&, const FeatureGrid&) = default;
};

/// Shared layout of every grid in a feature file.
struct FeatureLayout {
  std::uint32_t dim = 0;
  std::uint32_t grid_h = 0;
  std::uint32_t grid_w = 0;
  ImageGeometry geometry;

  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;
};

inline FeatureLayout layout_of(const FeatureGrid& g) {
  return {g.dim(), g.grid_h, g.grid_w, g.geometry};
}

} // namespace pccl
