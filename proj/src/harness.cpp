#include "pccl/harness.hpp"

#include <string>

#include "pccl/errors.hpp"
#include "pccl/parallel.hpp"

namespace pccl {

std::string_view strategy_name(Strategy s) {
  switch (s) {
  case Strategy::multi_model: return "MultiModel";
  case Strategy::joint_train: return "JointTrain";
  case Strategy::fine_tuning: return "FineTuning";
  case Strategy::patchcore_cl: return "PatchCoreCL";
  }
  return "?";
}

std::string_view strategy_flag(Strategy s) {
  switch (s) {
  case Strategy::multi_model: return "multi";
  case Strategy::joint_train: return "joint";
  case Strategy::fine_tuning: return "finetune";
  case Strategy::patchcore_cl: return "cl";
  }
  return "?";
}

Strategy parse_strategy(std::string_view flag) {
  for (auto s : kAllStrategies)
    if (flag == strategy_flag(s) || flag == strategy_name(s)) return s;
  throw InvalidArgument("unknown strategy '" + std::string(flag) + "' (expected multi|joint|finetune|cl)");
}

void validate_config(const StrategyConfig& config, std::size_t n_tasks) {
  if (n_tasks == 0) throw InvalidArgument("task stream is empty");
  if (config.memory_size < n_tasks)
    throw InvalidArgument("memory_size " + std::to_string(config.memory_size) + " is smaller than the " +
                          std::to_string(n_tasks) + " tasks; per-task quota would drop below 1");
  if (config.max_train_samples_per_task == 0) throw InvalidArgument("max_train_samples_per_task must be positive");
  if (!(config.fpr_limit > 0.0 && config.fpr_limit <= 1.0)) throw InvalidArgument("fpr_limit must be in (0, 1]");
  if (!(config.scoring.smoothing_sigma >= 0.0)) throw InvalidArgument("sigma must be nonnegative");
}

const RMatrix& RunResult::matrix(std::string_view name) const {
  auto it = r.find(name);
  if (it == r.end()) throw InvalidArgument("run has no metric " + std::string(name));
  return it->second;
}

namespace {

struct TaskEval {
  double image_auroc = 0.0;
  double image_f1 = 0.0;
  std::optional<double> pixel_auroc, pixel_f1, pixel_ap, pixel_aupro;
  std::optional<double> routing_accuracy;
};

bool has_pixel_labels(const TaskData& task) {
  bool any_anomalous = false, any_normal = false;
  for (const auto& g : task.test) {
    if (!g.mask) return false;
    for (auto m : *g.mask) (m ? any_anomalous : any_normal) = true;
  }
  return !task.test.empty() && any_anomalous && any_normal;
}

template <typename Scorer>
TaskEval evaluate(const TaskData& task, std::size_t task_index, bool pixel, const StrategyConfig& config,
                  bool track_routing, Scorer&& scorer) {
  std::vector<AnomalyResult> results(task.test.size());
  parallel_for(task.test.size(), [&](std::size_t i) { results[i] = scorer(task.test[i]); });

  TaskEval e;
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  std::size_t routed_correctly = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    scores.push_back(results[i].image_score);
    labels.push_back(static_cast<std::uint8_t>(task.test[i].label));
    if (results[i].routed_task == task_index) ++routed_correctly;
  }
  e.image_auroc = auroc(scores, labels);
  e.image_f1 = best_f1(scores, labels).f1;
  if (track_routing)
    e.routing_accuracy = static_cast<double>(routed_correctly) / static_cast<double>(results.size());

  if (pixel) {
    std::vector<double> pix;
    std::vector<std::uint8_t> pix_labels;
    std::vector<ScoreMap> maps;
    std::vector<std::vector<std::uint8_t>> masks;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& h = results[i].heatmap;
      pix.insert(pix.end(), h.values.begin(), h.values.end());
      pix_labels.insert(pix_labels.end(), task.test[i].mask->begin(), task.test[i].mask->end());
      maps.push_back(std::move(results[i].heatmap));
      masks.push_back(*task.test[i].mask);
    }
    e.pixel_auroc = auroc(pix, pix_labels);
    e.pixel_f1 = best_f1(pix, pix_labels).f1;
    e.pixel_ap = average_precision(pix, pix_labels);
    e.pixel_aupro = aupro(maps, masks, config.fpr_limit);
  }
  return e;
}

void record(RunResult& run, std::size_t k, std::size_t t, const TaskEval& e) {
  auto put = [&](std::string_view name, const std::optional<double>& v) {
    if (v) run.r.at(std::string(name)).set(k, t, *v);
  };
  put(metric::image_auroc, e.image_auroc);
  put(metric::image_f1, e.image_f1);
  put(metric::pixel_auroc, e.pixel_auroc);
  put(metric::pixel_f1, e.pixel_f1);
  put(metric::pixel_ap, e.pixel_ap);
  put(metric::pixel_aupro, e.pixel_aupro);
  put(metric::routing_accuracy, e.routing_accuracy);
}

PatchMatrix pool_patches(const std::vector<FeatureGrid>& grids, std::size_t limit) {
  PatchMatrix pool(grids.front().dim());
  const std::size_t n = std::min(limit, grids.size());
  pool.reserve_rows(n * grids.front().cells());
  for (std::size_t i = 0; i < n; ++i) pool.append_rows(grids[i].patches);
  return pool;
}

std::vector<std::size_t> sizes_of(const MemoryBankSet& set) {
  std::vector<std::size_t> out;
  for (const auto& b : set.banks()) out.push_back(b.size());
  return out;
}

void check_tasks(const std::vector<TaskData>& tasks) {
  std::optional<std::size_t> dim;
  for (const auto& t : tasks) {
    if (t.train.empty()) throw InvalidArgument("task " + t.name + " has no training grids");
    if (t.test.empty()) throw InvalidArgument("task " + t.name + " has no test grids");
    for (const auto* split : {&t.train, &t.test}) {
      for (const auto& g : *split) {
        g.validate();
        if (!dim) dim = g.dim();
        if (g.dim() != *dim)
          throw InvalidArgument("task " + t.name + " has dim " + std::to_string(g.dim()) + ", expected " +
                                std::to_string(*dim));
      }
    }
    for (const auto& g : t.train)
      if (g.label != Label::normal)
        throw InvalidArgument("task " + t.name + " trains on anomalous grid " + std::to_string(g.image_id));
  }
}

} // namespace

RunResult run_stream(const std::vector<TaskData>& tasks, const StrategyConfig& config,
                     const StepObserver& observer) {
  validate_config(config, tasks.size());
  check_tasks(tasks);

  const std::size_t T = tasks.size();
  const std::size_t dim = tasks.front().train.front().dim();
  RunResult run;
  run.strategy = config.strategy;
  for (std::size_t t = 0; t < T; ++t) {
    run.task_names.push_back(tasks[t].name);
    if (has_pixel_labels(tasks[t])) run.pixel_tasks.push_back(t);
  }
  std::vector<bool> pixel(T, false);
  for (auto t : run.pixel_tasks) pixel[t] = true;

  std::vector<std::string_view> names{metric::image_auroc, metric::image_f1};
  if (!run.pixel_tasks.empty())
    names.insert(names.end(), {metric::pixel_auroc, metric::pixel_f1, metric::pixel_ap, metric::pixel_aupro});
  if (config.strategy == Strategy::patchcore_cl) names.push_back(metric::routing_accuracy);
  for (auto n : names) run.r.emplace(std::string(n), RMatrix(std::string(n), T));

  const auto pool = [&](std::size_t t) { return pool_patches(tasks[t].train, config.max_train_samples_per_task); };
  const auto bank_scorer = [&](const MemoryBank& bank) {
    return [&bank, &config](const FeatureGrid& g) { return score_against(g, bank, config.scoring); };
  };

  switch (config.strategy) {
  case Strategy::multi_model: {
    MemoryBankSet set(config.memory_size * T, dim);
    std::vector<TaskEval> evals;
    for (std::size_t k = 0; k < T; ++k) {
      set.push_back(build_single_bank(pool(k), config.memory_size, update_seed(config.seed, k, k),
                                      static_cast<std::uint32_t>(k), tasks[k].name));
      evals.push_back(evaluate(tasks[k], k, pixel[k], config, false, bank_scorer(set.banks()[k])));
      for (std::size_t t = 0; t <= k; ++t) record(run, k, t, evals[t]);
      run.bank_sizes.push_back(sizes_of(set));
      if (observer) observer(k, set);
    }
    run.final_state = std::move(set);
    break;
  }
  case Strategy::joint_train: {
    PatchMatrix all(dim);
    for (std::size_t t = 0; t < T; ++t) all.append_rows(pool(t));
    MemoryBankSet set(config.memory_size, dim);
    set.push_back(build_single_bank(all, config.memory_size, update_seed(config.seed, 0, 0), 0, "joint"));
    for (std::size_t t = 0; t < T; ++t) {
      const auto e = evaluate(tasks[t], 0, pixel[t], config, false, bank_scorer(set.banks()[0]));
      for (std::size_t k = t; k < T; ++k) record(run, k, t, e);
    }
    run.bank_sizes.push_back(sizes_of(set));
    if (observer) observer(T - 1, set);
    run.final_state = std::move(set);
    break;
  }
  case Strategy::fine_tuning: {
    MemoryBankSet set(config.memory_size, dim);
    for (std::size_t k = 0; k < T; ++k) {
      set = MemoryBankSet(config.memory_size, dim);
      set.push_back(build_single_bank(pool(k), config.memory_size, update_seed(config.seed, k, k),
                                      static_cast<std::uint32_t>(k), tasks[k].name));
      for (std::size_t t = 0; t <= k; ++t)
        record(run, k, t, evaluate(tasks[t], t, pixel[t], config, false, bank_scorer(set.banks()[0])));
      run.bank_sizes.push_back(sizes_of(set));
      if (observer) observer(k, set);
    }
    run.final_state = std::move(set);
    break;
  }
  case Strategy::patchcore_cl: {
    MemoryBankSet set(config.memory_size, dim);
    for (std::size_t k = 0; k < T; ++k) {
      set = continual_update(set, pool(k), k, tasks[k].name, config.seed);
      for (std::size_t t = 0; t <= k; ++t)
        record(run, k, t, evaluate(tasks[t], t, pixel[t], config, true, [&](const FeatureGrid& g) {
                 return route_and_score(g, set, config.scoring);
               }));
      run.bank_sizes.push_back(sizes_of(set));
      if (observer) observer(k, set);
    }
    run.final_state = std::move(set);
    break;
  }
  }
  run.memory = memory_report(run.final_state, config.backbone_params);
  return run;
}

RunResult run_stream(const TaskStream& stream, const StrategyConfig& config, const StepObserver& observer) {
  validate_config(config, stream.tasks.size());
  return run_stream(load_stream(stream, config.max_train_samples_per_task), config, observer);
}

RunSummary summarize(const RunResult& run) {
  RunSummary s;
  const std::size_t T = run.task_names.size();
  const auto& f1 = run.matrix(metric::image_f1);
  s.image_auroc = run.matrix(metric::image_auroc).row_mean(T - 1).value();
  s.image_f1 = f1.row_mean(T - 1).value();
  if (T >= 2) s.forgetting_image_f1 = average_forgetting(f1);
  if (run.has(metric::routing_accuracy)) s.routing_accuracy = run.matrix(metric::routing_accuracy).row_mean(T - 1);

  if (!run.pixel_tasks.empty()) {
    const std::size_t k = run.pixel_tasks.back();
    auto pixel_mean = [&](std::string_view name) {
      const auto& m = run.matrix(name);
      double sum = 0.0;
      for (auto t : run.pixel_tasks) sum += m.at(k, t).value();
      return sum / static_cast<double>(run.pixel_tasks.size());
    };
    s.pixel_auroc = pixel_mean(metric::pixel_auroc);
    s.pixel_f1 = pixel_mean(metric::pixel_f1);
    s.pixel_ap = pixel_mean(metric::pixel_ap);
    s.pixel_aupro = pixel_mean(metric::pixel_aupro);
    if (run.pixel_tasks.size() >= 2)
      s.forgetting_pixel_f1 = average_forgetting(run.matrix(metric::pixel_f1).restrict(run.pixel_tasks));
  }
  return s;
}

std::vector<double> f1_curve(const RunResult& run) {
  std::vector<double> out;
  const auto& f1 = run.matrix(metric::image_f1);
  for (std::size_t k = 0; k < f1.tasks(); ++k) out.push_back(f1.row_mean(k).value());
  return out;
}

} // namespace pccl
