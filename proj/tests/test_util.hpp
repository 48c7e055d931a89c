#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "pccl/feature.hpp"

namespace testing {

class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("pccl_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline pccl::FeatureGrid random_grid(std::mt19937_64& rng, std::uint32_t gh, std::uint32_t gw, std::uint32_t dim,
                                     pccl::ImageGeometry geom, bool with_mask) {
  std::normal_distribution<float> n(0.0f, 3.0f);
  std::vector<float> v(std::size_t{gh} * gw * dim);
  for (auto& x : v) x = n(rng);
  pccl::FeatureGrid g;
  g.image_id = rng();
  g.grid_h = gh;
  g.grid_w = gw;
  g.geometry = geom;
  g.label = (rng() & 1) ? pccl::Label::anomalous : pccl::Label::normal;
  g.patches = pccl::PatchMatrix(dim, std::move(v));
  if (with_mask) {
    std::vector<std::uint8_t> m(geom.pixels());
    for (auto& b : m) b = static_cast<std::uint8_t>(rng() & 1);
    g.mask = std::move(m);
  }
  return g;
}

inline pccl::PatchMatrix matrix(std::size_t dim, std::initializer_list<float> values) {
  return pccl::PatchMatrix(dim, std::vector<float>(values));
}

} // namespace testing
