#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pccl/feature.hpp"

namespace pccl {

/// Category order of the medical benchmark stream.
inline constexpr std::array<std::string_view, 6> kBmadCategories = {
    "Brain_AD",          "Liver_AD",          "Retina_RESC_AD",
    "Chest_AD",          "Histopathology_AD", "Retina_OCT2017_AD"};

inline constexpr std::size_t kDefaultMaxTrainSamples = 2000;

struct TaskSource {
  std::string name;
  std::vector<std::filesystem::path> train_files;
  std::vector<std::filesystem::path> test_files;
};

/// Ordered tasks by file reference.
struct TaskStream {
  std::vector<TaskSource> tasks;
};

/// Feature grids of one task, in memory.
struct TaskData {
  std::string name;
  std::vector<FeatureGrid> train;
  std::vector<FeatureGrid> test;
};

/// Stream manifest JSON: {"tasks": [{"name", "train": [paths], "test": [paths]}]},
/// paths relative to the manifest's directory.
TaskStream read_stream_manifest(const std::filesystem::path& path);
void write_stream_manifest(const TaskStream& stream, const std::filesystem::path& path);

/// Reads every file of the stream. Train sets are cut to the first
/// `max_train_samples` grids. Throws InvalidArgument on duplicate names,
/// anomalous train grids, or layouts that differ across files.
std::vector<TaskData> load_stream(const TaskStream& stream,
                                  std::size_t max_train_samples = kDefaultMaxTrainSamples);

/// Builds a stream from feature files exported per category.
///
/// The manifest is JSON {"categories": {"<name>": {"train": [...], "test": [...]}}}
/// with paths relative to `root_dir`. Tasks come out in `categories` order
/// (the six benchmark categories by default). Throws InvalidArgument when a
/// category is missing or a train file holds an anomalous grid.
TaskStream ingest_bmad_layout(const std::filesystem::path& root_dir,
                              const std::filesystem::path& manifest,
                              std::span<const std::string_view> categories = kBmadCategories);

} // namespace pccl
