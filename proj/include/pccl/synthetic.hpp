#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pccl/stream.hpp"

namespace pccl {

/// Desk-scale substitute for real extracted features.
///
/// Task t draws its normal patches from an isotropic Gaussian (std `spread`)
/// around its own center; all task centers are `separation` apart (simplex
/// placement when dim >= n_tasks, otherwise spaced along one axis). Anomalous
/// test grids shift an `anomaly_block` x `anomaly_block` block of patches by
/// `anomaly_shift` along a task-specific random unit direction. The first
/// `pixel_tasks` tasks carry pixel masks on their test grids.
struct SyntheticConfig {
  std::size_t n_tasks = 3;
  std::size_t train_per_task = 20;
  std::size_t test_normal_per_task = 20;
  std::size_t test_anomalous_per_task = 20;
  std::uint32_t dim = 8;
  std::uint32_t grid_h = 7;
  std::uint32_t grid_w = 7;
  ImageGeometry geometry{28, 28};
  double separation = 50.0;
  double spread = 1.0;
  double anomaly_shift = 8.0;
  std::uint32_t anomaly_block = 2;
  std::size_t pixel_tasks = 3;
  std::uint64_t seed = 42;
};

/// Throws InvalidArgument for separation <= 0 or inconsistent sizes.
std::vector<TaskData> generate_synthetic_tasks(const SyntheticConfig& config);

/// Writes <name>_train.clvf / <name>_test.clvf per task plus stream.json
/// into `out_dir` and returns the stream (paths as written).
TaskStream generate_synthetic_stream(const SyntheticConfig& config,
                                     const std::filesystem::path& out_dir);

/// Task name used for synthetic task t.
std::string synthetic_task_name(std::size_t t);

/// Pixel rectangle [y0, y1) x [x0, x1) covered by patch cell (gy, gx).
struct PixelRect {
  std::uint32_t y0, y1, x0, x1;
};
PixelRect patch_footprint(std::uint32_t gy, std::uint32_t gx, std::uint32_t grid_h,
                          std::uint32_t grid_w, const ImageGeometry& geometry);

} // namespace pccl
