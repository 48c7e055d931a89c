#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "pccl/bank_io.hpp"
#include "pccl/cli.hpp"
#include "pccl/feature_io.hpp"
#include "pccl/report.hpp"
#include "test_util.hpp"

using namespace pccl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pccl");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const std::vector<std::string> kSmall = {"--train", "6", "--test-normal", "6", "--test-anomalous", "6",
                                         "--dim", "4", "--grid", "4", "--img", "16"};

std::vector<std::string> with_small(std::vector<std::string> args) {
  args.insert(args.end(), kSmall.begin(), kSmall.end());
  return args;
}

} // namespace

TEST_CASE("report.csv schema") {
  testing::TempDir dir("golden");
  const auto r = cli(with_small({"compare", "--memory-size", "60", "--out", dir.path().string()}));
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(slurp(dir / "report.csv"));
  const std::vector<std::string> header{"metric", "MultiModel", "JointTrain", "FineTuning", "PatchCoreCL"};
  const std::vector<std::string> names{"image_auroc",      "image_f1",        "pixel_auroc",
                                       "pixel_f1",         "pixel_pr",        "pixel_aupro",
                                       "arch_mem_mb",      "add_mem_mb",      "rel_gap_image_f1",
                                       "rel_gap_pixel_f1", "avg_forget_image_f1_pct", "avg_forget_pixel_f1_pct",
                                       "routing_accuracy"};
  REQUIRE(rows.size() == names.size() + 1);
  CHECK(rows[0] == header);
  for (std::size_t i = 0; i < names.size(); ++i) {
    CHECK(rows[i + 1][0] == names[i]);
    CHECK(rows[i + 1].size() == header.size());
  }
  CHECK(std::vector<std::string>(report_rows().begin(), report_rows().end()) == names);
  // Gaps, forgetting and routing are not applicable to the upper-bound strategies.
  for (std::size_t i = 9; i <= 13; ++i) {
    CHECK(rows[i][1] == "-");
    CHECK(rows[i][2] == "-");
  }
  CHECK(rows[13][3] == "-");
  CHECK(rows[13][4] == "1.000000");

  for (auto flag : {"multi", "joint", "finetune", "cl"}) {
    const fs::path run = dir / flag;
    for (auto file : {"report.csv", "curve_f1_image.csv", "banks.clmb", "memory_report.json", "run.json",
                      "r_matrix_image_auroc.json", "r_matrix_image_f1.json", "r_matrix_pixel_aupro.json"})
      CHECK_MESSAGE(fs::exists(run / file), (run / file).string());
  }
  CHECK(parse_csv(slurp(dir / "curve_f1_image.csv"))[0] ==
        std::vector<std::string>{"task_index", "task_name", "MultiModel", "JointTrain", "FineTuning",
                                 "PatchCoreCL"});
}

TEST_CASE("compare on a single-task stream gives identical strategy columns") {
  testing::TempDir dir("single");
  const auto r = cli(with_small({"compare", "--tasks", "1", "--memory-size", "40", "--out", dir.path().string()}));
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(slurp(dir / "report.csv"));
  for (std::size_t i = 1; i <= 8; ++i) {
    CAPTURE(rows[i][0]);
    for (std::size_t c = 2; c < 5; ++c) CHECK(rows[i][c] == rows[i][1]);
  }
}

TEST_CASE("inspect reports a six-task bank at the full budget") {
  testing::TempDir dir("inspect");
  MemoryBankSet set(30000, 1536);
  for (std::uint32_t t = 0; t < 6; ++t)
    set.push_back({t, "task" + std::to_string(t), PatchMatrix(1536, std::vector<float>(5000 * 1536, 0.5f))});
  save_banks(set, dir / "banks.clmb");
  set = MemoryBankSet(1, 1);

  const auto r = cli({"inspect", "--banks", (dir / "banks.clmb").string(), "--json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["banks"].size() == 6);
  for (const auto& b : j["banks"]) CHECK(b["vectors"] == 5000);
  CHECK(j["total_vectors"] == 30000);
  CHECK(j["dim"] == 1536);
  CHECK(j["budget_usage"] == 1.0);
  CHECK(j["additional_mb"].get<double>() == doctest::Approx(184.32));
  CHECK(j["architecture_mb"].get<double>() == doctest::Approx(275.53296));

  const auto text = cli({"inspect", "--banks", (dir / "banks.clmb").string()});
  CHECK(text.code == 0);
  CHECK(text.out.find("task5: 5000 vectors") != std::string::npos);
  CHECK(text.out.find("add. mem 184.32 MB") != std::string::npos);
}

TEST_CASE("run rejects a budget smaller than the task count") {
  testing::TempDir dir("reject");
  const auto r = cli({"run", "--strategy", "cl", "--memory-size", "5", "--tasks", "6", "--out", dir.path().string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("memory") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "stream"));
}

TEST_CASE("argument errors exit nonzero") {
  CHECK(cli({}).code != 0);
  CHECK(cli({"run", "--out", "x", "--bogus"}).code != 0);
  CHECK(cli({"run", "--strategy", "replay", "--out", "x"}).code != 0);
  CHECK(cli({"inspect"}).code != 0);
  CHECK(cli({"inspect", "--banks", "/nonexistent/banks.clmb"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("run --json parses and matches the written run directory") {
  testing::TempDir dir("runjson");
  const auto r = cli(with_small({"run", "--strategy", "cl", "--memory-size", "48", "--json", "--out", dir.path().string()}));
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["strategy"] == "cl");
  CHECK(j["tasks"].size() == 3);
  CHECK(j["bank_sizes"] == nlohmann::json::array({16, 16, 16}));
  CHECK(j["routing_accuracy"] == 1.0);
  CHECK(fs::exists(dir / "banks.clmb"));
  CHECK(fs::exists(dir / "stream" / "stream.json"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "run.json"));
  CHECK(manifest["memory_size"] == 48);

  // An explicit stream reproduces the generated one.
  testing::TempDir again("runjson2");
  const auto r2 = cli({"run", "--strategy", "cl", "--memory-size", "48", "--stream",
                       (dir / "stream" / "stream.json").string(), "--out", again.path().string()});
  REQUIRE(r2.code == 0);
  CHECK(slurp(again / "banks.clmb") == slurp(dir / "banks.clmb"));
  CHECK(slurp(again / "report.csv") == slurp(dir / "report.csv"));
}

TEST_CASE("synth and score") {
  testing::TempDir dir("score");
  const auto s = cli(with_small({"synth", "--tasks", "2", "--out", (dir / "stream").string(), "--json"}));
  REQUIRE(s.code == 0);
  CHECK(nlohmann::json::parse(s.out)["tasks"].size() == 2);
  REQUIRE(cli({"run", "--strategy", "cl", "--memory-size", "32", "--stream", (dir / "stream" / "stream.json").string(),
               "--out", (dir / "run").string()})
              .code == 0);

  const fs::path test_file = dir / "stream" / "Liver_AD_test.clvf";
  const auto r = cli({"score", "--banks", (dir / "run" / "banks.clmb").string(), "--features", test_file.string(),
                      "--out", (dir / "scores").string(), "--json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  const auto grids = read_feature_file(test_file).grids;
  REQUIRE(j["results"].size() == grids.size());
  for (std::size_t i = 0; i < grids.size(); ++i) {
    const auto& res = j["results"][i];
    CHECK(res["routed_task"] == 1);
    CHECK(res["routed_name"] == "Liver_AD");
    const auto stem = "heatmap_" + std::to_string(grids[i].image_id);
    CHECK(fs::file_size(dir / "scores" / (stem + ".f32")) == 16 * 16 * 4);
    CHECK(fs::exists(dir / "scores" / (stem + ".pgm")));
  }
  CHECK(nlohmann::json::parse(slurp(dir / "scores" / "scores.json")) == j);

  // Dimension disagreement between features and banks is a stage error.
  testing::TempDir other("score_dim");
  REQUIRE(cli({"synth", "--tasks", "1", "--dim", "3", "--out", other.path().string()}).code == 0);
  const auto bad = cli({"score", "--banks", (dir / "run" / "banks.clmb").string(), "--features",
                        (other / "Brain_AD_test.clvf").string(), "--out", (dir / "bad").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("score") != std::string::npos);
}
