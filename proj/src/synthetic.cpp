#include "pccl/synthetic.hpp"

#include <cmath>
#include <random>
#include <string>

#include "pccl/errors.hpp"
#include "pccl/feature_io.hpp"
#include "pccl/memory.hpp"

namespace pccl {

namespace fs = std::filesystem;

namespace {

std::vector<double> task_center(const SyntheticConfig& c, std::size_t t) {
  std::vector<double> center(c.dim, 0.0);
  if (c.dim >= c.n_tasks) center[t] = c.separation / std::sqrt(2.0);
  else center[0] = static_cast<double>(t) * c.separation;
  return center;
}

std::vector<double> unit_direction(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = normal(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

FeatureGrid draw_grid(const SyntheticConfig& c, std::mt19937_64& rng, const std::vector<double>& center,
                      std::uint64_t image_id) {
  std::normal_distribution<double> noise(0.0, c.spread);
  std::vector<float> values;
  values.reserve(std::size_t{c.grid_h} * c.grid_w * c.dim);
  for (std::size_t p = 0; p < std::size_t{c.grid_h} * c.grid_w; ++p)
    for (std::size_t d = 0; d < c.dim; ++d) values.push_back(static_cast<float>(center[d] + noise(rng)));
  FeatureGrid g;
  g.image_id = image_id;
  g.grid_h = c.grid_h;
  g.grid_w = c.grid_w;
  g.geometry = c.geometry;
  g.patches = PatchMatrix(c.dim, std::move(values));
  return g;
}

void validate(const SyntheticConfig& c) {
  if (!(c.separation > 0.0)) throw InvalidArgument("separation must be positive");
  if (!(c.spread >= 0.0)) throw InvalidArgument("spread must be nonnegative");
  if (!(c.anomaly_shift >= 0.0)) throw InvalidArgument("anomaly_shift must be nonnegative");
  if (c.n_tasks == 0) throw InvalidArgument("need at least one task");
  if (c.train_per_task == 0) throw InvalidArgument("need at least one train grid per task");
  if (c.dim == 0 || c.grid_h == 0 || c.grid_w == 0) throw InvalidArgument("grid shape must be positive");
  if (c.geometry.img_h < c.grid_h || c.geometry.img_w < c.grid_w)
    throw InvalidArgument("image must have at least one pixel per patch cell");
  if (c.anomaly_block == 0 || c.anomaly_block > std::min(c.grid_h, c.grid_w))
    throw InvalidArgument("anomaly_block must fit inside the grid");
}

} // namespace

std::string synthetic_task_name(std::size_t t) {
  if (t < kBmadCategories.size()) return std::string(kBmadCategories[t]);
  return "task_" + std::to_string(t);
}

PixelRect patch_footprint(std::uint32_t gy, std::uint32_t gx, std::uint32_t grid_h, std::uint32_t grid_w,
                          const ImageGeometry& g) {
  auto edge = [](std::uint32_t cell, std::uint32_t cells, std::uint32_t pixels) {
    return static_cast<std::uint32_t>(std::uint64_t{cell} * pixels / cells);
  };
  return {edge(gy, grid_h, g.img_h), edge(gy + 1, grid_h, g.img_h), edge(gx, grid_w, g.img_w),
          edge(gx + 1, grid_w, g.img_w)};
}

std::vector<TaskData> generate_synthetic_tasks(const SyntheticConfig& c) {
  validate(c);
  std::vector<TaskData> tasks;
  for (std::size_t t = 0; t < c.n_tasks; ++t) {
    std::mt19937_64 rng(update_seed(c.seed, t, 0x5EED));
    const auto center = task_center(c, t);
    const auto direction = unit_direction(rng, c.dim);
    const bool with_masks = t < c.pixel_tasks;
    const std::uint64_t id_base = std::uint64_t{t + 1} << 40;

    TaskData task;
    task.name = synthetic_task_name(t);
    for (std::size_t i = 0; i < c.train_per_task; ++i)
      task.train.push_back(draw_grid(c, rng, center, id_base | i));

    const std::size_t n_test = c.test_normal_per_task + c.test_anomalous_per_task;
    for (std::size_t i = 0; i < n_test; ++i) {
      auto g = draw_grid(c, rng, center, id_base | (std::uint64_t{1} << 32) | i);
      std::vector<std::uint8_t> mask;
      if (with_masks) mask.assign(c.geometry.pixels(), 0);
      if (i >= c.test_normal_per_task) {
        g.label = Label::anomalous;
        const std::uint32_t by = static_cast<std::uint32_t>(rng() % (c.grid_h - c.anomaly_block + 1));
        const std::uint32_t bx = static_cast<std::uint32_t>(rng() % (c.grid_w - c.anomaly_block + 1));
        std::vector<float> values(g.patches.values().begin(), g.patches.values().end());
        for (std::uint32_t y = by; y < by + c.anomaly_block; ++y) {
          for (std::uint32_t x = bx; x < bx + c.anomaly_block; ++x) {
            float* cell = values.data() + (std::size_t{y} * c.grid_w + x) * c.dim;
            for (std::size_t d = 0; d < c.dim; ++d)
              cell[d] = static_cast<float>(cell[d] + c.anomaly_shift * direction[d]);
            if (with_masks) {
              const auto r = patch_footprint(y, x, c.grid_h, c.grid_w, c.geometry);
              for (auto py = r.y0; py < r.y1; ++py)
                for (auto px = r.x0; px < r.x1; ++px) mask[std::size_t{py} * c.geometry.img_w + px] = 1;
            }
          }
        }
        g.patches = PatchMatrix(c.dim, std::move(values));
      }
      if (with_masks) g.mask = std::move(mask);
      task.test.push_back(std::move(g));
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

TaskStream generate_synthetic_stream(const SyntheticConfig& config, const fs::path& out_dir) {
  const auto tasks = generate_synthetic_tasks(config);
  fs::create_directories(out_dir);
  const FeatureLayout layout{config.dim, config.grid_h, config.grid_w, config.geometry};
  TaskStream stream;
  for (const auto& t : tasks) {
    TaskSource src;
    src.name = t.name;
    src.train_files.push_back(out_dir / (t.name + "_train.clvf"));
    src.test_files.push_back(out_dir / (t.name + "_test.clvf"));
    write_feature_file(src.train_files.front(), layout, t.train);
    write_feature_file(src.test_files.front(), layout, t.test);
    stream.tasks.push_back(std::move(src));
  }
  write_stream_manifest(stream, out_dir / "stream.json");
  return stream;
}

} // namespace pccl
