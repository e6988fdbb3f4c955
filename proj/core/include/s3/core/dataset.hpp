#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "s3/core/example.hpp"
#include "s3/core/task_spec.hpp"

namespace s3 {

/// An immutable, ordered collection of examples for one task. Safe to share
/// between threads once built.
class Dataset {
 public:
  Dataset() = default;

  /// Validates every example against the task (kind, label set, unique ids).
  Dataset(std::shared_ptr<const TaskSpec> task, std::vector<Example> examples);

  bool has_task() const noexcept { return task_ != nullptr; }
  const TaskSpec& task() const;
  const std::shared_ptr<const TaskSpec>& task_ptr() const noexcept { return task_; }

  std::span<const Example> examples() const noexcept { return examples_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  const Example& operator[](std::size_t i) const { return examples_.at(i); }
  auto begin() const noexcept { return examples_.begin(); }
  auto end() const noexcept { return examples_.end(); }

  const Example* find(std::string_view id) const;

  /// Equality on examples only (ids, payloads, provenance).
  bool same_examples(const Dataset& other) const { return examples_ == other.examples_; }

 private:
  std::shared_ptr<const TaskSpec> task_;
  std::vector<Example> examples_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Single-writer accumulator that assigns stable ids: the payload's content hash,
/// suffixed with the insertion counter when that hash is already taken.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(std::shared_ptr<const TaskSpec> task);

  const Example& add(Payload payload, Provenance provenance);

  /// Keep a caller-supplied id; a clash is resolved with the same counter suffix.
  const Example& add(Example example);

  std::size_t size() const noexcept { return examples_.size(); }

  Dataset build() &&;

 private:
  std::string unique_id(std::string base);

  std::shared_ptr<const TaskSpec> task_;
  std::vector<Example> examples_;
  std::unordered_set<std::string> ids_;
};

/// Concatenate training parts in order. With dedup, later payload duplicates
/// (provenance ignored) are dropped. All parts must share a task; the result of
/// merging nothing is an empty, task-less dataset.
Dataset merge(std::span<const Dataset> parts, bool dedup);

struct LoadOptions {
  /// Stage assumed for records that carry no provenance (e.g. hand-made gold files).
  std::optional<Stage> default_stage;
};

void save_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path, std::shared_ptr<const TaskSpec> task,
                     const LoadOptions& opts = {});

/// One JSONL record with fixed field order: id, kind, x, y, context, question, answer, provenance.
std::string serialize_example(const Example& e);
nlohmann::ordered_json example_to_json(const Example& e);

/// Parse one record against a task; throws ConfigError naming the problem.
Example example_from_json(const nlohmann::json& j, const TaskSpec& task, const LoadOptions& opts = {});

}  // namespace s3
