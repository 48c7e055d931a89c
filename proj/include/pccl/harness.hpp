#pragma once

#include <cstdint>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pccl/memory.hpp"
#include "pccl/metrics.hpp"
#include "pccl/scoring.hpp"
#include "pccl/stream.hpp"

namespace pccl {

enum class Strategy { multi_model, joint_train, fine_tuning, patchcore_cl };

inline constexpr std::array<Strategy, 4> kAllStrategies = {
    Strategy::multi_model, Strategy::joint_train, Strategy::fine_tuning, Strategy::patchcore_cl};

/// Display name, e.g. "PatchCoreCL".
std::string_view strategy_name(Strategy s);
/// CLI spelling: multi | joint | finetune | cl.
std::string_view strategy_flag(Strategy s);
Strategy parse_strategy(std::string_view flag);

/// Parameter count of WideResNet50-2, the default feature extractor.
inline constexpr std::uint64_t kDefaultBackboneParams = 68'883'240;

struct StrategyConfig {
  Strategy strategy = Strategy::patchcore_cl;
  std::size_t memory_size = 30000;
  std::uint64_t seed = 42;
  ScoringParams scoring;
  std::size_t max_train_samples_per_task = kDefaultMaxTrainSamples;
  double fpr_limit = kDefaultFprLimit;
  std::uint64_t backbone_params = kDefaultBackboneParams;
};

/// Throws InvalidArgument when the config cannot run `n_tasks` tasks
/// (e.g. memory_size < n_tasks would leave a zero quota).
void validate_config(const StrategyConfig& config, std::size_t n_tasks);

namespace metric {
inline constexpr std::string_view image_auroc = "image_auroc";
inline constexpr std::string_view image_f1 = "image_f1";
inline constexpr std::string_view pixel_auroc = "pixel_auroc";
inline constexpr std::string_view pixel_f1 = "pixel_f1";
inline constexpr std::string_view pixel_ap = "pixel_ap";
inline constexpr std::string_view pixel_aupro = "pixel_aupro";
inline constexpr std::string_view routing_accuracy = "routing_accuracy";
} // namespace metric

struct RunResult {
  Strategy strategy = Strategy::patchcore_cl;
  std::vector<std::string> task_names;
  /// Tasks whose test grids carry masks; pixel metrics exist only for these.
  std::vector<std::size_t> pixel_tasks;
  std::map<std::string, RMatrix, std::less<>> r;
  MemoryBankSet final_state;
  MemoryReport memory;
  /// Bank sizes after each training step.
  std::vector<std::vector<std::size_t>> bank_sizes;

  const RMatrix& matrix(std::string_view name) const;
  bool has(std::string_view name) const { return r.find(name) != r.end(); }
};

/// Called after each training step with the current model state.
using StepObserver = std::function<void(std::size_t step, const MemoryBankSet&)>;

/// Trains the strategy over the tasks in order and evaluates every task seen
/// so far after each step.
///
/// MultiModel keeps one memory_size bank per task and scores each task with
/// its own bank; JointTrain builds one bank from all tasks pooled and
/// evaluates once, replicating the scores down each column; FineTuning
/// replaces its single bank with one built from the current task;
/// PatchCoreCL applies the continual update and routes at inference.
RunResult run_stream(const std::vector<TaskData>& tasks, const StrategyConfig& config,
                     const StepObserver& observer = {});

RunResult run_stream(const TaskStream& stream, const StrategyConfig& config,
                     const StepObserver& observer = {});

/// Table-level numbers for one run.
struct RunSummary {
  double image_auroc = 0.0;
  double image_f1 = 0.0;
  std::optional<double> pixel_auroc, pixel_f1, pixel_ap, pixel_aupro;
  std::optional<double> forgetting_image_f1;
  std::optional<double> forgetting_pixel_f1;
  std::optional<double> routing_accuracy;
};

/// Image metrics: mean of the final row over all tasks. Pixel metrics: mean
/// over mask-carrying tasks in the row of the last such task. Forgetting is
/// computed on the full image F1 matrix and on the pixel F1 matrix restricted
/// to mask-carrying tasks (needs at least two tasks each).
RunSummary summarize(const RunResult& run);

/// Per-step mean image F1 over the tasks seen so far.
std::vector<double> f1_curve(const RunResult& run);

} // namespace pccl
