#include "pccl/feature_io.hpp"

#include <string>

#include "binary_io.hpp"
#include "pccl/errors.hpp"

namespace pccl {

void FeatureGrid::validate() const {
  if (grid_h == 0 || grid_w == 0) throw InvalidArgument("feature grid has an empty shape");
  if (patches.dim() == 0) throw InvalidArgument("feature grid has zero dim");
  if (patches.rows() != cells())
    throw InvalidArgument("feature grid holds " + std::to_string(patches.rows()) +
                          " patches, expected " + std::to_string(cells()));
  if (geometry.img_h == 0 || geometry.img_w == 0)
    throw InvalidArgument("image geometry must be positive");
  if (mask) {
    if (mask->size() != geometry.pixels())
      throw InvalidArgument("mask has " + std::to_string(mask->size()) + " entries, expected " +
                            std::to_string(geometry.pixels()));
    for (auto m : *mask)
      if (m > 1) throw InvalidArgument("mask entries must be 0 or 1");
  }
}

void write_feature_file(const std::filesystem::path& path, const FeatureLayout& layout,
                        std::span<const FeatureGrid> grids) {
  detail::ByteWriter w;
  w.put(kFeatureMagic);
  w.put(kFeatureVersion);
  w.put(layout.dim);
  w.put(layout.grid_h);
  w.put(layout.grid_w);
  w.put(layout.geometry.img_h);
  w.put(layout.geometry.img_w);
  w.put(static_cast<std::uint32_t>(grids.size()));
  for (const auto& g : grids) {
    g.validate();
    if (layout_of(g) != layout)
      throw FormatError(FormatError::Kind::dim_mismatch,
                        "grid " + std::to_string(g.image_id) + " does not match the file layout");
    w.put(g.image_id);
    w.put(static_cast<std::uint8_t>(g.label));
    w.put(static_cast<std::uint8_t>(g.mask ? 1 : 0));
    w.put_f32s(g.patches.values());
    if (g.mask) w.put_bytes(*g.mask);
  }
  detail::write_file_bytes(path, w.bytes());
}

void write_feature_file(const std::filesystem::path& path, std::span<const FeatureGrid> grids) {
  if (grids.empty()) throw InvalidArgument("cannot infer a layout from an empty grid list");
  write_feature_file(path, layout_of(grids.front()), grids);
}

FeatureFile read_feature_file(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  detail::ByteReader r(bytes, path.string());

  if (r.get<std::uint32_t>() != kFeatureMagic)
    throw FormatError(FormatError::Kind::bad_magic, path.string() + ": not a CLVF feature file");
  if (const auto v = r.get<std::uint16_t>(); v != kFeatureVersion)
    throw FormatError(FormatError::Kind::version_mismatch,
                      path.string() + ": unsupported CLVF version " + std::to_string(v));

  FeatureFile file;
  auto& L = file.layout;
  L.dim = r.get<std::uint32_t>();
  L.grid_h = r.get<std::uint32_t>();
  L.grid_w = r.get<std::uint32_t>();
  L.geometry.img_h = r.get<std::uint32_t>();
  L.geometry.img_w = r.get<std::uint32_t>();
  const auto count = r.get<std::uint32_t>();
  if (L.dim == 0 || L.grid_h == 0 || L.grid_w == 0 || L.geometry.img_h == 0 ||
      L.geometry.img_w == 0) {
    if (count != 0)
      throw FormatError(FormatError::Kind::dim_mismatch, path.string() + ": zero-sized layout");
  }

  const std::size_t payload = std::size_t{L.grid_h} * L.grid_w * L.dim;
  // Guard against absurd counts before reserving.
  r.need(std::size_t{count} * (10 + payload * sizeof(float)));
  file.grids.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    FeatureGrid g;
    g.image_id = r.get<std::uint64_t>();
    const auto label = r.get<std::uint8_t>();
    if (label > 1)
      throw FormatError(FormatError::Kind::corrupt,
                        path.string() + ": invalid label byte " + std::to_string(label));
    g.label = static_cast<Label>(label);
    const auto has_mask = r.get<std::uint8_t>();
    g.grid_h = L.grid_h;
    g.grid_w = L.grid_w;
    g.geometry = L.geometry;
    std::vector<float> values(payload);
    r.get_f32s(values);
    try {
      g.patches = PatchMatrix(L.dim, std::move(values));
    } catch (const InvalidArgument& e) {
      throw FormatError(FormatError::Kind::corrupt, path.string() + ": " + e.what());
    }
    if (has_mask) {
      std::vector<std::uint8_t> mask(L.geometry.pixels());
      r.get_bytes(mask);
      g.mask = std::move(mask);
    }
    file.grids.push_back(std::move(g));
  }
  return file;
}

} // namespace pccl
