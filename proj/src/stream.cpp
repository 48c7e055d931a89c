#include "pccl/stream.hpp"

#include <fstream>
#include <set>

#include "json.hpp"
#include "pccl/errors.hpp"
#include "pccl/feature_io.hpp"

namespace pccl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

std::vector<fs::path> path_list(const json& j, const fs::path& base, const std::string& where) {
  std::vector<fs::path> out;
  if (j.is_string()) {
    out.push_back(base / j.get<std::string>());
    return out;
  }
  if (!j.is_array()) throw InvalidArgument(where + " must be a path or a list of paths");
  for (const auto& p : j) out.push_back(base / p.get<std::string>());
  return out;
}

void reject_anomalous_train(const FeatureFile& file, const fs::path& path) {
  for (const auto& g : file.grids)
    if (g.label != Label::normal)
      throw InvalidArgument("label leakage: train file " + path.string() + " holds anomalous grid " +
                            std::to_string(g.image_id));
}

} // namespace

TaskStream read_stream_manifest(const fs::path& path) {
  const json j = read_json(path);
  const fs::path base = path.parent_path();
  TaskStream stream;
  try {
    for (const auto& t : j.at("tasks")) {
      TaskSource src;
      src.name = t.at("name").get<std::string>();
      src.train_files = path_list(t.at("train"), base, src.name + ".train");
      src.test_files = path_list(t.at("test"), base, src.name + ".test");
      stream.tasks.push_back(std::move(src));
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  return stream;
}

void write_stream_manifest(const TaskStream& stream, const fs::path& path) {
  const fs::path base = path.parent_path();
  auto rel = [&](const fs::path& p) { return fs::relative(p, base.empty() ? "." : base).generic_string(); };
  json tasks = json::array();
  for (const auto& t : stream.tasks) {
    json train = json::array(), test = json::array();
    for (const auto& p : t.train_files) train.push_back(rel(p));
    for (const auto& p : t.test_files) test.push_back(rel(p));
    tasks.push_back({{"name", t.name}, {"train", train}, {"test", test}});
  }
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot create " + path.string());
  out << json{{"tasks", tasks}}.dump(2) << "\n";
}

std::vector<TaskData> load_stream(const TaskStream& stream, std::size_t max_train_samples) {
  if (stream.tasks.empty()) throw InvalidArgument("task stream is empty");
  std::set<std::string> names;
  std::optional<FeatureLayout> layout;
  auto check_layout = [&](const FeatureFile& f, const fs::path& p) {
    if (f.grids.empty()) return;
    if (!layout) layout = f.layout;
    else if (f.layout.dim != layout->dim)
      throw InvalidArgument(p.string() + ": dim " + std::to_string(f.layout.dim) +
                            " disagrees with the stream dim " + std::to_string(layout->dim));
  };

  std::vector<TaskData> out;
  for (const auto& src : stream.tasks) {
    if (!names.insert(src.name).second) throw InvalidArgument("duplicate task name " + src.name);
    TaskData task;
    task.name = src.name;
    for (const auto& p : src.train_files) {
      auto f = read_feature_file(p);
      reject_anomalous_train(f, p);
      check_layout(f, p);
      for (auto& g : f.grids) {
        if (task.train.size() >= max_train_samples) break;
        task.train.push_back(std::move(g));
      }
    }
    for (const auto& p : src.test_files) {
      auto f = read_feature_file(p);
      check_layout(f, p);
      for (auto& g : f.grids) task.test.push_back(std::move(g));
    }
    out.push_back(std::move(task));
  }
  return out;
}

TaskStream ingest_bmad_layout(const fs::path& root_dir, const fs::path& manifest,
                              std::span<const std::string_view> categories) {
  const json j = read_json(manifest);
  if (!j.contains("categories") || !j["categories"].is_object())
    throw InvalidArgument(manifest.string() + ": missing \"categories\" object");
  const auto& cats = j["categories"];
  TaskStream stream;
  for (auto name : categories) {
    const std::string key(name);
    if (!cats.contains(key)) throw InvalidArgument("missing category " + key + " in " + manifest.string());
    const auto& c = cats[key];
    if (!c.contains("train") || !c.contains("test"))
      throw InvalidArgument("category " + key + " needs train and test entries");
    TaskSource src;
    src.name = key;
    src.train_files = path_list(c["train"], root_dir, key + ".train");
    src.test_files = path_list(c["test"], root_dir, key + ".test");
    for (const auto& p : src.train_files) {
      if (!fs::exists(p)) throw InvalidArgument("missing file " + p.string() + " for " + key);
      reject_anomalous_train(read_feature_file(p), p);
    }
    for (const auto& p : src.test_files)
      if (!fs::exists(p)) throw InvalidArgument("missing file " + p.string() + " for " + key);
    stream.tasks.push_back(std::move(src));
  }
  return stream;
}

} // namespace pccl
