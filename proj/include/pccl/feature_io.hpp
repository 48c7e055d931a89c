#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "pccl/feature.hpp"

namespace pccl {

// Feature interchange file ("CLVF"), little-endian:
//   magic u32 = 0x434C5646, version u16 = 1, dim u32, grid_h u32, grid_w u32,
//   img_h u32, img_w u32, count u32
//   count x { image_id u64, label u8, has_mask u8,
//             grid_h*grid_w*dim f32, [img_h*img_w u8 mask] }

inline constexpr std::uint32_t kFeatureMagic = 0x434C5646;
inline constexpr std::uint16_t kFeatureVersion = 1;

struct FeatureFile {
  FeatureLayout layout;
  std::vector<FeatureGrid> grids;
};

/// Every grid must match `layout`; otherwise FormatError(dim_mismatch).
void write_feature_file(const std::filesystem::path& path, const FeatureLayout& layout,
                        std::span<const FeatureGrid> grids);

/// Convenience overload taking the layout from the first grid (grids non-empty).
void write_feature_file(const std::filesystem::path& path, std::span<const FeatureGrid> grids);

FeatureFile read_feature_file(const std::filesystem::path& path);

} // namespace pccl
