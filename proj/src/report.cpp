#include "pccl/report.hpp"

#include <array>
#include <cstdio>
#include <fstream>

#include "pccl/bank_io.hpp"
#include "pccl/errors.hpp"

namespace pccl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 13> kReportRows = {
    "image_auroc",        "image_f1",          "pixel_auroc",
    "pixel_f1",           "pixel_pr",          "pixel_aupro",
    "arch_mem_mb",        "add_mem_mb",        "rel_gap_image_f1",
    "rel_gap_pixel_f1",   "avg_forget_image_f1_pct", "avg_forget_pixel_f1_pct",
    "routing_accuracy"};

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string cell(const std::optional<double>& v) { return v ? number(*v) : "-"; }

bool is_continual(Strategy s) { return s == Strategy::fine_tuning || s == Strategy::patchcore_cl; }

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

} // namespace

std::span<const std::string_view> report_rows() { return kReportRows; }

std::string report_csv(std::span<const RunResult> runs) {
  std::vector<RunSummary> summaries;
  std::optional<RunSummary> joint;
  for (const auto& r : runs) {
    summaries.push_back(summarize(r));
    if (r.strategy == Strategy::joint_train) joint = summaries.back();
  }

  std::string out = "metric";
  for (const auto& r : runs) out += "," + std::string(strategy_name(r.strategy));
  out += "\n";
  for (auto row : kReportRows) {
    out += row;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& s = summaries[i];
      const bool cl = is_continual(runs[i].strategy);
      std::optional<double> v;
      if (row == "image_auroc") v = s.image_auroc;
      else if (row == "image_f1") v = s.image_f1;
      else if (row == "pixel_auroc") v = s.pixel_auroc;
      else if (row == "pixel_f1") v = s.pixel_f1;
      else if (row == "pixel_pr") v = s.pixel_ap;
      else if (row == "pixel_aupro") v = s.pixel_aupro;
      else if (row == "arch_mem_mb") v = runs[i].memory.architecture_mb;
      else if (row == "add_mem_mb") v = runs[i].memory.additional_mb;
      else if (row == "rel_gap_image_f1") {
        if (cl && joint) v = relative_gap(joint->image_f1, s.image_f1);
      } else if (row == "rel_gap_pixel_f1") {
        if (cl && joint && joint->pixel_f1 && s.pixel_f1) v = relative_gap(*joint->pixel_f1, *s.pixel_f1);
      } else if (row == "avg_forget_image_f1_pct") {
        if (cl) v = s.forgetting_image_f1;
      } else if (row == "avg_forget_pixel_f1_pct") {
        if (cl) v = s.forgetting_pixel_f1;
      } else if (row == "routing_accuracy") {
        v = s.routing_accuracy;
      }
      out += "," + cell(v);
    }
    out += "\n";
  }
  return out;
}

std::string curve_csv(std::span<const RunResult> runs) {
  if (runs.empty()) return "task_index,task_name\n";
  std::string out = "task_index,task_name";
  std::vector<std::vector<double>> curves;
  for (const auto& r : runs) {
    out += "," + std::string(strategy_name(r.strategy));
    curves.push_back(f1_curve(r));
  }
  out += "\n";
  const auto& names = runs.front().task_names;
  for (std::size_t k = 0; k < names.size(); ++k) {
    out += std::to_string(k) + "," + names[k];
    for (const auto& c : curves) out += "," + number(c[k]);
    out += "\n";
  }
  return out;
}

json r_matrix_json(const RMatrix& r, std::span<const std::string> task_names) {
  json rows = json::array();
  for (std::size_t k = 0; k < r.tasks(); ++k) {
    json row = json::array();
    for (std::size_t t = 0; t <= k; ++t) row.push_back(optional_json(r.at(k, t)));
    rows.push_back(row);
  }
  return {{"metric", r.metric()},
          {"tasks", std::vector<std::string>(task_names.begin(), task_names.end())},
          {"values", rows}};
}

json memory_report_json(const RunResult& run, std::uint64_t backbone_params) {
  json banks = json::array();
  for (const auto& b : run.final_state.banks())
    banks.push_back({{"task_index", b.task_index}, {"name", b.task_name}, {"vectors", b.size()}});
  return {{"architecture_mb", run.memory.architecture_mb},
          {"additional_mb", run.memory.additional_mb},
          {"backbone_params", backbone_params},
          {"dim", run.final_state.dim()},
          {"total_vectors", run.final_state.total_vectors()},
          {"banks", banks}};
}

json run_manifest_json(const StrategyConfig& c, const fs::path& stream) {
  return {{"stream", stream.generic_string()},
          {"strategy", strategy_flag(c.strategy)},
          {"memory_size", c.memory_size},
          {"seed", c.seed},
          {"scoring", {{"reweight_b", c.scoring.reweight_neighbors}, {"sigma", c.scoring.smoothing_sigma}}},
          {"fpr_limit", c.fpr_limit},
          {"max_train_samples_per_task", c.max_train_samples_per_task},
          {"backbone_params", c.backbone_params}};
}

void write_text_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot create " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

void write_run_directory(const RunResult& run, const StrategyConfig& config, const fs::path& stream,
                         const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& [name, m] : run.r)
    write_text_file(dir / ("r_matrix_" + name + ".json"), r_matrix_json(m, run.task_names).dump(2) + "\n");
  const std::span<const RunResult> one(&run, 1);
  write_text_file(dir / "report.csv", report_csv(one));
  write_text_file(dir / "curve_f1_image.csv", curve_csv(one));
  save_banks(run.final_state, dir / "banks.clmb");
  write_text_file(dir / "memory_report.json", memory_report_json(run, config.backbone_params).dump(2) + "\n");
  write_text_file(dir / "run.json", run_manifest_json(config, stream).dump(2) + "\n");
}

} // namespace pccl
