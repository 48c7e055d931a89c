#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "pccl/harness.hpp"
#include "json.hpp"

namespace pccl {

/// Row names of report.csv, in order.
std::span<const std::string_view> report_rows();

/// Metric x strategy table. Relative gaps are filled for continual strategies
/// when a JointTrain run is among `runs`.
std::string report_csv(std::span<const RunResult> runs);

/// task_index,task_name,<strategy...> rows of the mean image F1 curve.
std::string curve_csv(std::span<const RunResult> runs);

nlohmann::json r_matrix_json(const RMatrix& r, std::span<const std::string> task_names);
nlohmann::json memory_report_json(const RunResult& run, std::uint64_t backbone_params);
nlohmann::json run_manifest_json(const StrategyConfig& config, const std::filesystem::path& stream);

/// Writes r_matrix_<metric>.json, report.csv, curve_f1_image.csv, banks.clmb,
/// memory_report.json and run.json into `dir`.
void write_run_directory(const RunResult& run, const StrategyConfig& config,
                         const std::filesystem::path& stream, const std::filesystem::path& dir);

void write_text_file(const std::filesystem::path& path, std::string_view text);

} // namespace pccl
