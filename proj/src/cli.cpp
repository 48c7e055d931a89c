#include "pccl/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pccl/bank_io.hpp"
#include "pccl/errors.hpp"
#include "pccl/feature_io.hpp"
#include "pccl/harness.hpp"
#include "pccl/report.hpp"
#include "pccl/synthetic.hpp"

namespace pccl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Failure tagged with the pipeline stage it came from.
class StageError : public std::runtime_error {
public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what) {}
};

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

struct SynthFlags {
  SyntheticConfig config;
  std::uint32_t grid = 7;
  std::uint32_t img = 28;
};

void add_synth_flags(CLI::App* app, SynthFlags& f) {
  auto& c = f.config;
  app->add_option("--train", c.train_per_task, "Training grids per task")->capture_default_str();
  app->add_option("--test-normal", c.test_normal_per_task, "Normal test grids per task")->capture_default_str();
  app->add_option("--test-anomalous", c.test_anomalous_per_task, "Anomalous test grids per task")
      ->capture_default_str();
  app->add_option("--dim", c.dim, "Patch feature dimension")->capture_default_str();
  app->add_option("--grid", f.grid, "Patch grid side length")->capture_default_str();
  app->add_option("--img", f.img, "Image side length in pixels")->capture_default_str();
  app->add_option("--separation", c.separation, "Distance between task cluster centers")->capture_default_str();
  app->add_option("--spread", c.spread, "Within-task Gaussian std-dev")->capture_default_str();
  app->add_option("--anomaly-shift", c.anomaly_shift, "Shift applied to anomalous patches")->capture_default_str();
  app->add_option("--block", c.anomaly_block, "Side of the anomalous patch block")->capture_default_str();
  app->add_option("--pixel-tasks", c.pixel_tasks, "Leading tasks that carry pixel masks")->capture_default_str();
}

SyntheticConfig finish(SynthFlags f, std::size_t tasks, std::uint64_t seed) {
  f.config.n_tasks = tasks;
  f.config.seed = seed;
  f.config.grid_h = f.config.grid_w = f.grid;
  f.config.geometry = {f.img, f.img};
  return f.config;
}

struct RunFlags {
  std::string strategy = "cl";
  StrategyConfig config;
  std::string stream;
  std::string out;
  std::size_t tasks = 0;
  SynthFlags synth;
};

void add_run_flags(CLI::App* app, RunFlags& f, bool with_strategy) {
  auto& c = f.config;
  if (with_strategy)
    app->add_option("--strategy", f.strategy, "multi | joint | finetune | cl")
        ->check(CLI::IsMember({"multi", "joint", "finetune", "cl"}))
        ->capture_default_str();
  app->add_option("--memory-size", c.memory_size, "Global memory-bank budget in vectors")->capture_default_str();
  app->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  app->add_option("--fpr-limit", c.fpr_limit, "FPR integration limit of AUPRO")->capture_default_str();
  app->add_option("--reweight-b", c.scoring.reweight_neighbors, "Reweighting neighbourhood (0 = off)")
      ->capture_default_str();
  app->add_option("--sigma", c.scoring.smoothing_sigma, "Heatmap Gaussian sigma in pixels")->capture_default_str();
  app->add_option("--max-train", c.max_train_samples_per_task, "Training grids kept per task")
      ->capture_default_str();
  app->add_option("--backbone-params", c.backbone_params, "Backbone parameter count for memory accounting")
      ->capture_default_str();
  app->add_option("--stream", f.stream, "Stream manifest (default: generate a synthetic stream)");
  app->add_option("--tasks", f.tasks, "Use the first N tasks (synthetic default 3)");
  app->add_option("--out", f.out, "Output directory")->required();
  add_synth_flags(app, f.synth);
}

struct PreparedStream {
  std::vector<TaskData> tasks;
  fs::path manifest;
};

PreparedStream prepare_stream(const RunFlags& f) {
  PreparedStream p;
  if (f.stream.empty()) {
    const std::size_t n = f.tasks ? f.tasks : 3;
    stage("validate config", [&] { validate_config(f.config, n); });
    const fs::path dir = fs::path(f.out) / "stream";
    stage("generate synthetic stream", [&] { generate_synthetic_stream(finish(f.synth, n, f.config.seed), dir); });
    p.manifest = dir / "stream.json";
  } else {
    p.manifest = f.stream;
  }
  auto stream = stage("read stream manifest", [&] { return read_stream_manifest(p.manifest); });
  if (f.tasks) {
    if (f.tasks > stream.tasks.size())
      throw StageError("select tasks", "stream has only " + std::to_string(stream.tasks.size()) + " tasks");
    stream.tasks.resize(f.tasks);
  }
  stage("validate config", [&] { validate_config(f.config, stream.tasks.size()); });
  p.tasks = stage("load stream", [&] { return load_stream(stream, f.config.max_train_samples_per_task); });
  return p;
}

json summary_json(const RunResult& run) {
  const auto s = summarize(run);
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json sizes = json::array();
  for (const auto& b : run.final_state.banks()) sizes.push_back(b.size());
  return {{"strategy", strategy_flag(run.strategy)},
          {"tasks", run.task_names},
          {"image_auroc", s.image_auroc},
          {"image_f1", s.image_f1},
          {"pixel_auroc", opt(s.pixel_auroc)},
          {"pixel_f1", opt(s.pixel_f1)},
          {"pixel_ap", opt(s.pixel_ap)},
          {"pixel_aupro", opt(s.pixel_aupro)},
          {"avg_forgetting_image_f1_pct", opt(s.forgetting_image_f1)},
          {"avg_forgetting_pixel_f1_pct", opt(s.forgetting_pixel_f1)},
          {"routing_accuracy", opt(s.routing_accuracy)},
          {"bank_sizes", sizes},
          {"architecture_mb", run.memory.architecture_mb},
          {"additional_mb", run.memory.additional_mb}};
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void print_summary(std::ostream& out, const RunResult& run) {
  const auto s = summarize(run);
  out << strategy_name(run.strategy) << ": image AUROC " << fixed(s.image_auroc) << ", image F1 "
      << fixed(s.image_f1);
  if (s.pixel_auroc) out << ", pixel AUROC " << fixed(*s.pixel_auroc) << ", AUPRO " << fixed(*s.pixel_aupro);
  if (s.forgetting_image_f1) out << ", forgetting " << fixed(*s.forgetting_image_f1, 2) << "%";
  if (s.routing_accuracy) out << ", routing " << fixed(*s.routing_accuracy);
  out << ", add. mem " << fixed(run.memory.additional_mb, 2) << " MB\n";
}

int cmd_synth(const SynthFlags& flags, std::size_t tasks, std::uint64_t seed, const std::string& out_dir,
              bool as_json, std::ostream& out) {
  const auto config = finish(flags, tasks, seed);
  const auto stream = stage("generate synthetic stream", [&] { return generate_synthetic_stream(config, out_dir); });
  const fs::path manifest = fs::path(out_dir) / "stream.json";
  if (as_json) {
    json tasks_json = json::array();
    for (const auto& t : stream.tasks)
      tasks_json.push_back({{"name", t.name},
                            {"train", t.train_files.front().generic_string()},
                            {"test", t.test_files.front().generic_string()}});
    out << json{{"stream", manifest.generic_string()}, {"tasks", tasks_json}}.dump(2) << "\n";
  } else {
    out << "wrote " << stream.tasks.size() << " tasks to " << manifest.generic_string() << "\n";
  }
  return 0;
}

int cmd_run(RunFlags f, bool as_json, std::ostream& out) {
  f.config.strategy = parse_strategy(f.strategy);
  const auto prepared = prepare_stream(f);
  const auto run = stage("run stream", [&] { return run_stream(prepared.tasks, f.config); });
  stage("write run directory", [&] { write_run_directory(run, f.config, prepared.manifest, f.out); });
  if (as_json) {
    auto j = summary_json(run);
    j["out"] = f.out;
    out << j.dump(2) << "\n";
  } else {
    print_summary(out, run);
    out << "run directory: " << f.out << "\n";
  }
  return 0;
}

int cmd_compare(RunFlags f, bool as_json, std::ostream& out) {
  const auto prepared = prepare_stream(f);
  std::vector<RunResult> runs;
  for (auto s : kAllStrategies) {
    auto config = f.config;
    config.strategy = s;
    runs.push_back(stage("run " + std::string(strategy_flag(s)), [&] { return run_stream(prepared.tasks, config); }));
    stage("write run directory", [&] {
      write_run_directory(runs.back(), config, prepared.manifest, fs::path(f.out) / strategy_flag(s));
    });
  }
  const std::string report = report_csv(runs);
  stage("write report", [&] {
    write_text_file(fs::path(f.out) / "report.csv", report);
    write_text_file(fs::path(f.out) / "curve_f1_image.csv", curve_csv(runs));
  });
  if (as_json) {
    json j = json::array();
    for (const auto& r : runs) j.push_back(summary_json(r));
    out << json{{"out", f.out}, {"runs", j}}.dump(2) << "\n";
  } else {
    out << report;
  }
  return 0;
}

int cmd_inspect(const std::string& banks, std::uint64_t backbone_params, bool as_json, std::ostream& out) {
  const auto set = stage("load banks", [&] { return load_banks(banks); });
  const auto mem = memory_report(set, backbone_params);
  const double usage = static_cast<double>(set.total_vectors()) / static_cast<double>(set.memory_size());
  if (as_json) {
    json list = json::array();
    for (const auto& b : set.banks())
      list.push_back({{"task_index", b.task_index}, {"name", b.task_name}, {"vectors", b.size()}});
    out << json{{"dim", set.dim()},
                {"memory_size", set.memory_size()},
                {"total_vectors", set.total_vectors()},
                {"budget_usage", usage},
                {"banks", list},
                {"architecture_mb", mem.architecture_mb},
                {"additional_mb", mem.additional_mb}}
               .dump(2)
        << "\n";
    return 0;
  }
  out << "dim " << set.dim() << ", memory_size " << set.memory_size() << ", " << set.banks().size()
      << " banks\n";
  for (const auto& b : set.banks())
    out << "  [" << b.task_index << "] " << b.task_name << ": " << b.size() << " vectors\n";
  out << "total " << set.total_vectors() << " vectors (" << fixed(100.0 * usage, 2) << "% of budget)\n";
  out << "arch. mem " << fixed(mem.architecture_mb, 2) << " MB, add. mem " << fixed(mem.additional_mb, 2)
      << " MB\n";
  return 0;
}

int cmd_score(const std::string& banks, const std::string& features, const std::string& out_dir,
              const ScoringParams& params, bool as_json, std::ostream& out) {
  const auto set = stage("load banks", [&] { return load_banks(banks); });
  const auto file = stage("read features", [&] { return read_feature_file(features); });
  if (!file.grids.empty() && file.layout.dim != set.dim())
    throw StageError("score", "feature dim " + std::to_string(file.layout.dim) + " does not match bank dim " +
                                  std::to_string(set.dim()));
  fs::create_directories(out_dir);
  json results = json::array();
  for (const auto& g : file.grids) {
    const auto r = stage("score", [&] { return route_and_score(g, set, params); });
    const std::string stem = "heatmap_" + std::to_string(g.image_id);
    stage("write heatmap", [&] {
      write_heatmap_f32(r.heatmap, fs::path(out_dir) / (stem + ".f32"));
      write_heatmap_pgm(r.heatmap, fs::path(out_dir) / (stem + ".pgm"));
    });
    results.push_back({{"image_id", g.image_id},
                       {"label", static_cast<int>(g.label)},
                       {"image_score", r.image_score},
                       {"routed_task", r.routed_task},
                       {"routed_name", set.banks()[r.routed_task].task_name},
                       {"heatmap", {{"height", r.heatmap.height}, {"width", r.heatmap.width}, {"file", stem + ".f32"}}}});
  }
  const json doc{{"banks", banks}, {"features", features}, {"results", results}};
  write_text_file(fs::path(out_dir) / "scores.json", doc.dump(2) + "\n");
  if (as_json) {
    out << doc.dump(2) << "\n";
  } else {
    for (const auto& r : results)
      out << r["image_id"].get<std::uint64_t>() << ": score " << fixed(r["image_score"].get<double>())
          << " -> task " << r["routed_task"].get<std::uint32_t>() << " (" << r["routed_name"].get<std::string>()
          << ")\n";
  }
  return 0;
}

} // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Continual PatchCore memory banks, scoring and evaluation harness", "pccl"};
  app.require_subcommand(1);

  bool as_json = false;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic task stream");
  SynthFlags synth_flags;
  std::size_t synth_tasks = 3;
  std::uint64_t synth_seed = 42;
  std::string synth_out;
  add_synth_flags(synth, synth_flags);
  synth->add_option("--tasks", synth_tasks, "Number of tasks")->capture_default_str();
  synth->add_option("--seed", synth_seed, "RNG seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_flag("--json", as_json, "Machine-readable output");

  auto* run = app.add_subcommand("run", "Run one strategy over a stream");
  RunFlags run_flags;
  add_run_flags(run, run_flags, true);
  run->add_flag("--json", as_json, "Machine-readable output");

  auto* compare = app.add_subcommand("compare", "Run all four strategies and emit a comparison table");
  RunFlags compare_flags;
  add_run_flags(compare, compare_flags, false);
  compare->add_flag("--json", as_json, "Machine-readable output");

  auto* inspect = app.add_subcommand("inspect", "Summarize a saved bank file");
  std::string inspect_banks;
  std::uint64_t inspect_params = kDefaultBackboneParams;
  inspect->add_option("--banks", inspect_banks, "Bank file (.clmb)")->required();
  inspect->add_option("--backbone-params", inspect_params, "Backbone parameter count")->capture_default_str();
  inspect->add_flag("--json", as_json, "Machine-readable output");

  auto* score = app.add_subcommand("score", "Score a feature file against saved banks");
  std::string score_banks, score_features, score_out;
  ScoringParams score_params;
  score->add_option("--banks", score_banks, "Bank file (.clmb)")->required();
  score->add_option("--features", score_features, "Feature file (.clvf)")->required();
  score->add_option("--out", score_out, "Output directory")->required();
  score->add_option("--reweight-b", score_params.reweight_neighbors, "Reweighting neighbourhood")
      ->capture_default_str();
  score->add_option("--sigma", score_params.smoothing_sigma, "Heatmap Gaussian sigma")->capture_default_str();
  score->add_flag("--json", as_json, "Machine-readable output");

  std::vector<std::string> argv(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_flags, synth_tasks, synth_seed, synth_out, as_json, out);
    if (run->parsed()) return cmd_run(run_flags, as_json, out);
    if (compare->parsed()) return cmd_compare(compare_flags, as_json, out);
    if (inspect->parsed()) return cmd_inspect(inspect_banks, inspect_params, as_json, out);
    if (score->parsed()) return cmd_score(score_banks, score_features, score_out, score_params, as_json, out);
  } catch (const std::exception& e) {
    err << "pccl: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

} // namespace pccl
