#include "s3/core/dataset.hpp"

#include <fstream>
#include <sstream>

#include "s3/common/error.hpp"
#include "s3/common/hash.hpp"
#include "s3/common/text.hpp"

namespace s3 {

// ---------------------------------------------------------------- examples

std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::seed: return "seed";
    case Stage::add: return "add";
    case Stage::gold_val: return "gold_val";
    case Stage::gold_test: return "gold_test";
  }
  return "seed";
}

Stage stage_from_string(std::string_view s) {
  for (auto st : {Stage::seed, Stage::add, Stage::gold_val, Stage::gold_test}) {
    if (to_string(st) == s) return st;
  }
  throw ConfigError("unknown provenance stage '" + std::string(s) + "'");
}

void validate(const Provenance& p) {
  if (p.round < 0) throw ConfigError("provenance round must be >= 0");
  if (p.stage == Stage::add) {
    if (p.round < 1) throw ConfigError("add-stage provenance needs round >= 1");
    if (!p.source_error_id || p.source_error_id->empty()) {
      throw ConfigError("add-stage provenance needs a source_error_id");
    }
  }
  if (p.stage == Stage::seed && p.round != 0) throw ConfigError("seed-stage provenance must have round 0");
}

TaskKind kind_of(const Payload& p) noexcept {
  switch (p.index()) {
    case 0: return TaskKind::single_text_classification;
    case 1: return TaskKind::pair_classification;
    default: return TaskKind::context_qa;
  }
}

std::string_view record_kind(TaskKind k) noexcept {
  switch (k) {
    case TaskKind::single_text_classification: return "text_label";
    case TaskKind::pair_classification: return "pair_label";
    case TaskKind::context_qa: return "context_qa";
  }
  return "text_label";
}

const std::string* Example::label() const noexcept {
  if (auto* t = std::get_if<TextLabel>(&payload)) return &t->y;
  if (auto* p = std::get_if<PairLabel>(&payload)) return &p->y;
  return nullptr;
}

const std::string& Example::target() const noexcept {
  if (auto* t = std::get_if<TextLabel>(&payload)) return t->x;
  if (auto* p = std::get_if<PairLabel>(&payload)) return p->x;
  return std::get<ContextQA>(payload).question;
}

const std::string* Example::context() const noexcept {
  if (auto* p = std::get_if<PairLabel>(&payload)) return &p->context;
  if (auto* q = std::get_if<ContextQA>(&payload)) return &q->context;
  return nullptr;
}

std::string payload_key(const Payload& p) {
  // \x1f separates fields so that field boundaries cannot collide.
  std::string key(record_kind(kind_of(p)));
  auto field = [&](const std::string& s) {
    key.push_back('\x1f');
    key += text::normalize_space(s);
  };
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TextLabel>) {
          field(v.x);
          field(v.y);
        } else if constexpr (std::is_same_v<T, PairLabel>) {
          field(v.context);
          field(v.x);
          field(v.y);
        } else {
          field(v.context);
          field(v.answer);
          field(v.question);
        }
      },
      p);
  return key;
}

std::string content_hash(const Payload& p) { return sha256_hex(payload_key(p)).substr(0, 16); }

// ---------------------------------------------------------------- dataset

namespace {

void check_example(const Example& e, const TaskSpec& task) {
  if (e.id.empty()) throw ConfigError("example with empty id");
  if (kind_of(e.payload) != task.kind) {
    throw ConfigError("example " + e.id + " is a " + std::string(record_kind(kind_of(e.payload))) +
                      " record but task '" + task.name + "' is " + std::string(to_string(task.kind)));
  }
  if (const auto* y = e.label(); y && !task.label_index(*y)) {
    throw ConfigError("example " + e.id + ": label '" + *y + "' is not in the label set of task '" + task.name + "'");
  }
  if (const auto* qa = std::get_if<ContextQA>(&e.payload); qa && qa->answer.empty()) {
    throw ConfigError("example " + e.id + ": context_qa answer must be non-empty");
  }
  validate(e.provenance);
}

}  // namespace

Dataset::Dataset(std::shared_ptr<const TaskSpec> task, std::vector<Example> examples)
    : task_(std::move(task)), examples_(std::move(examples)) {
  if (!task_ && !examples_.empty()) throw ConfigError("a non-empty dataset needs a task");
  index_.reserve(examples_.size());
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    check_example(examples_[i], *task_);
    if (!index_.emplace(examples_[i].id, i).second) throw ConfigError("duplicate example id " + examples_[i].id);
  }
}

const TaskSpec& Dataset::task() const {
  if (!task_) throw InvariantError("dataset has no task");
  return *task_;
}

const Example* Dataset::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &examples_[it->second];
}

DatasetBuilder::DatasetBuilder(std::shared_ptr<const TaskSpec> task) : task_(std::move(task)) {
  if (!task_) throw InvariantError("DatasetBuilder needs a task");
}

std::string DatasetBuilder::unique_id(std::string base) {
  if (ids_.insert(base).second) return base;
  for (std::size_t counter = examples_.size();; ++counter) {
    std::string candidate = base + "-" + std::to_string(counter);
    if (ids_.insert(candidate).second) return candidate;
  }
}

const Example& DatasetBuilder::add(Payload payload, Provenance provenance) {
  Example e{content_hash(payload), std::move(payload), std::move(provenance)};
  return add(std::move(e));
}

const Example& DatasetBuilder::add(Example example) {
  if (example.id.empty()) example.id = content_hash(example.payload);
  check_example(example, *task_);
  example.id = unique_id(std::move(example.id));
  examples_.push_back(std::move(example));
  return examples_.back();
}

Dataset DatasetBuilder::build() && { return Dataset(std::move(task_), std::move(examples_)); }

Dataset merge(std::span<const Dataset> parts, bool dedup) {
  std::shared_ptr<const TaskSpec> task;
  for (const auto& p : parts) {
    if (!p.has_task()) {
      if (!p.empty()) throw InvariantError("task-less dataset with examples");
      continue;
    }
    if (!task) {
      task = p.task_ptr();
    } else if (task != p.task_ptr() &&
               (task->kind != p.task().kind || task->name != p.task().name || task->labels != p.task().labels)) {
      throw ConfigError("cannot merge datasets of different tasks ('" + task->name + "' vs '" + p.task().name + "')");
    }
  }
  if (!task) return Dataset{};
  DatasetBuilder b(task);
  std::unordered_set<std::string> seen;
  for (const auto& p : parts) {
    for (const auto& e : p) {
      if (dedup && !seen.insert(payload_key(e.payload)).second) continue;
      b.add(e);
    }
  }
  return std::move(b).build();
}

// ---------------------------------------------------------------- JSONL

nlohmann::ordered_json example_to_json(const Example& e) {
  nlohmann::ordered_json j;
  j["id"] = e.id;
  j["kind"] = std::string(record_kind(kind_of(e.payload)));
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TextLabel>) {
          j["x"] = v.x;
          j["y"] = v.y;
        } else if constexpr (std::is_same_v<T, PairLabel>) {
          j["x"] = v.x;
          j["y"] = v.y;
          j["context"] = v.context;
        } else {
          j["context"] = v.context;
          j["question"] = v.question;
          j["answer"] = v.answer;
        }
      },
      e.payload);
  nlohmann::ordered_json p;
  p["stage"] = std::string(to_string(e.provenance.stage));
  p["round"] = e.provenance.round;
  if (e.provenance.source_error_id) p["source_error_id"] = *e.provenance.source_error_id;
  if (e.provenance.prompt_hash) p["prompt_hash"] = *e.provenance.prompt_hash;
  j["provenance"] = std::move(p);
  return j;
}

std::string serialize_example(const Example& e) { return example_to_json(e).dump(); }

namespace {

std::string required_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) throw ConfigError(std::string("missing string field '") + key + "'");
  return j[key].get<std::string>();
}

}  // namespace

Example example_from_json(const nlohmann::json& j, const TaskSpec& task, const LoadOptions& opts) {
  if (!j.is_object()) throw ConfigError("record is not a JSON object");
  Example e;
  if (j.contains("id")) {
    if (!j["id"].is_string()) throw ConfigError("'id' must be a string");
    e.id = j["id"].get<std::string>();
  }
  TaskKind kind = task.kind;
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) throw ConfigError("'kind' must be a string");
    const auto k = j["kind"].get<std::string>();
    if (k != record_kind(task.kind)) {
      throw ConfigError("record kind '" + k + "' does not match task kind " + std::string(to_string(task.kind)));
    }
  }
  switch (kind) {
    case TaskKind::single_text_classification:
      e.payload = TextLabel{required_string(j, "x"), required_string(j, "y")};
      break;
    case TaskKind::pair_classification:
      e.payload = PairLabel{required_string(j, "context"), required_string(j, "x"), required_string(j, "y")};
      break;
    case TaskKind::context_qa:
      e.payload = ContextQA{required_string(j, "context"), required_string(j, "answer"), required_string(j, "question")};
      break;
  }
  if (const auto* y = e.label(); y && !task.label_index(*y)) {
    throw ConfigError("label '" + *y + "' is not in the label set of task '" + task.name + "'");
  }
  if (j.contains("provenance")) {
    const auto& p = j["provenance"];
    if (!p.is_object()) throw ConfigError("'provenance' must be an object");
    e.provenance.stage = stage_from_string(required_string(p, "stage"));
    if (p.contains("round")) {
      if (!p["round"].is_number_integer()) throw ConfigError("provenance round must be an integer");
      e.provenance.round = p["round"].get<int>();
    }
    if (p.contains("source_error_id")) e.provenance.source_error_id = required_string(p, "source_error_id");
    if (p.contains("prompt_hash")) e.provenance.prompt_hash = required_string(p, "prompt_hash");
  } else if (opts.default_stage) {
    e.provenance.stage = *opts.default_stage;
  } else {
    throw ConfigError("record has no provenance");
  }
  validate(e.provenance);
  return e;
}

namespace {
constexpr int kSchemaVersion = 1;
constexpr const char* kFormat = "s3-dataset";
}  // namespace

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  nlohmann::ordered_json header;
  header["format"] = kFormat;
  header["schema_version"] = kSchemaVersion;
  header["task"] = d.has_task() ? d.task().name : std::string();
  out << header.dump() << '\n';
  for (const auto& e : d) out << serialize_example(e) << '\n';
  if (!out) throw ConfigError("write failed: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path, std::shared_ptr<const TaskSpec> task,
                     const LoadOptions& opts) {
  if (!task) throw InvariantError("load_dataset needs a task");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset " + path.string());
  DatasetBuilder b(task);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw RecordError(path.string(), lineno, std::string("malformed JSON: ") + e.what());
    }
    if (j.is_object() && j.contains("format")) {
      if (j["format"] != kFormat) throw RecordError(path.string(), lineno, "unknown header format");
      if (j.value("schema_version", 0) != kSchemaVersion) {
        throw RecordError(path.string(), lineno, "unsupported schema_version");
      }
      continue;
    }
    try {
      auto e = example_from_json(j, *task, opts);
      const bool had_id = !e.id.empty();
      const auto& added = b.add(std::move(e));
      if (had_id && added.id != j["id"].get<std::string>()) {
        throw ConfigError("duplicate example id " + j["id"].get<std::string>());
      }
    } catch (const RecordError&) {
      throw;
    } catch (const ConfigError& e) {
      throw RecordError(path.string(), lineno, e.what());
    }
  }
  return std::move(b).build();
}

}  // namespace s3
