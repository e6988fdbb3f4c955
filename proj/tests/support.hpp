#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "s3/core/dataset.hpp"
#include "s3/core/task_spec.hpp"
#include "s3/prompting/template.hpp"

namespace s3::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "s3test-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::shared_ptr<TaskSpec> builtin_task(const std::string& dataset, TaskKind kind) {
  auto t = std::make_shared<TaskSpec>();
  t->name = dataset;
  t->kind = kind;
  auto b = prompting::builtin_templates(dataset);
  t->templates = b.templates;
  t->labels = b.labels;
  return t;
}

inline std::shared_ptr<TaskSpec> imdb_task() { return builtin_task("imdb", TaskKind::single_text_classification); }
inline std::shared_ptr<TaskSpec> qnli_task() { return builtin_task("qnli", TaskKind::pair_classification); }
inline std::shared_ptr<TaskSpec> rte_task() { return builtin_task("rte", TaskKind::pair_classification); }
inline std::shared_ptr<TaskSpec> adqa_task() { return builtin_task("adqa", TaskKind::context_qa); }

inline Dataset text_dataset(std::shared_ptr<const TaskSpec> task,
                            const std::vector<std::pair<std::string, std::string>>& rows,
                            Stage stage = Stage::seed) {
  DatasetBuilder b(std::move(task));
  for (const auto& [x, y] : rows) {
    Provenance p;
    p.stage = stage;
    b.add(TextLabel{x, y}, p);
  }
  return std::move(b).build();
}

}  // namespace s3::testing
