#include "s3/core/task_spec.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "s3/common/error.hpp"

namespace s3 {

using prompting::Role;

std::string_view to_string(TaskKind k) noexcept {
  switch (k) {
    case TaskKind::single_text_classification: return "single_text_classification";
    case TaskKind::pair_classification: return "pair_classification";
    case TaskKind::context_qa: return "context_qa";
  }
  return "single_text_classification";
}

TaskKind task_kind_from_string(std::string_view s) {
  for (auto k : {TaskKind::single_text_classification, TaskKind::pair_classification, TaskKind::context_qa}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown task kind '" + std::string(s) + "'");
}

std::optional<std::size_t> TaskSpec::label_index(std::string_view label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

std::vector<Role> required_roles(TaskKind kind) {
  if (kind == TaskKind::single_text_classification) return {Role::ration, Role::query1, Role::mis1};
  return {Role::query2, Role::mis2};
}

void validate(const TaskSpec& spec) {
  if (spec.name.empty()) throw ConfigError("task name must not be empty");
  if (spec.kind != TaskKind::context_qa && spec.labels.empty()) {
    throw ConfigError("task '" + spec.name + "': classification tasks need at least one label");
  }
  std::set<std::string> seen;
  for (const auto& l : spec.labels) {
    if (l.empty()) throw ConfigError("labels must be non-empty strings");
    if (!seen.insert(l).second) throw ConfigError("duplicate label '" + l + "'");
  }
  if (spec.rationale_count == 0) throw ConfigError("K must be >= 1");
  if (spec.rationales_per_query == 0) throw ConfigError("k must be >= 1");
  if (spec.rationales_per_query > spec.rationale_count) {
    throw ConfigError("k exceeds K (k=" + std::to_string(spec.rationales_per_query) +
                      ", K=" + std::to_string(spec.rationale_count) + ")");
  }
  if (!(spec.qa_f1_threshold >= 0.0 && spec.qa_f1_threshold <= 1.0)) {
    throw ConfigError("qa_f1_threshold must lie in [0, 1]");
  }
  if (spec.expansion == 0) throw ConfigError("expansion must be >= 1");
  if (spec.generation_attempts == 0) throw ConfigError("generation_attempts must be >= 1");
  if (!(spec.sampling.temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (!(spec.sampling.top_p > 0.0 && spec.sampling.top_p <= 1.0)) throw ConfigError("top_p must lie in (0, 1]");
  if (spec.sampling.max_tokens <= 0) throw ConfigError("max_tokens must be positive");

  std::vector<std::string> missing;
  for (Role r : required_roles(spec.kind)) {
    if (!spec.templates.contains(r)) missing.emplace_back(prompting::to_string(r));
  }
  if (!missing.empty()) {
    std::string msg = "task '" + spec.name + "' is missing template role(s):";
    for (const auto& m : missing) msg += " " + m;
    throw ConfigError(msg);
  }
  for (const auto& [role, t] : spec.templates) {
    if (t.role != role) throw ConfigError("template stored under the wrong role");
    prompting::placeholders(t.body);
  }
}

namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

std::size_t get_count(const nlohmann::json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  const auto& v = j[key];
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string("field '") + key + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

}  // namespace

TaskSpec task_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("task spec must be a JSON object");
  TaskSpec s;
  if (!j.contains("name") || !j["name"].is_string()) throw ConfigError("task spec needs a string 'name'");
  s.name = j["name"].get<std::string>();
  if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("task spec needs a string 'kind'");
  s.kind = task_kind_from_string(j["kind"].get<std::string>());

  if (j.contains("builtin_templates")) {
    auto b = prompting::builtin_templates(get_or<std::string>(j, "builtin_templates", ""));
    s.templates = std::move(b.templates);
    s.labels = std::move(b.labels);
  }
  if (j.contains("labels")) {
    if (!j["labels"].is_array()) throw ConfigError("'labels' must be an array of strings");
    s.labels.clear();
    for (const auto& l : j["labels"]) {
      if (!l.is_string()) throw ConfigError("'labels' must be an array of strings");
      s.labels.push_back(l.get<std::string>());
    }
  }
  if (j.contains("templates")) {
    for (auto& [role, t] : prompting::templates_from_json(j["templates"])) s.templates[role] = std::move(t);
  }

  s.rationale_count = get_count(j, "rationale_count", s.rationale_count);
  s.rationales_per_query = get_count(j, "rationales_per_query", s.rationales_per_query);
  s.seed_size = get_count(j, "seed_size", s.seed_size);
  s.ees_rounds = get_count(j, "ees_rounds", s.ees_rounds);
  s.qa_f1_threshold = get_or<double>(j, "qa_f1_threshold", s.qa_f1_threshold);
  s.dedup = get_or<bool>(j, "dedup", s.dedup);
  if (j.contains("rationale_prompt_count") && !j["rationale_prompt_count"].is_null()) {
    s.rationale_prompt_count = get_count(j, "rationale_prompt_count", 0);
  }
  s.expansion = get_count(j, "expansion", s.expansion);
  s.balance = get_or<bool>(j, "balance", s.balance);
  s.context_epochs = get_or<bool>(j, "context_epochs", s.context_epochs);
  s.min_improvement = get_or<double>(j, "min_improvement", s.min_improvement);
  s.generation_attempts = get_count(j, "generation_attempts", s.generation_attempts);
  if (j.contains("sampling")) {
    const auto& sp = j["sampling"];
    if (!sp.is_object()) throw ConfigError("'sampling' must be an object");
    s.sampling.temperature = get_or<double>(sp, "temperature", s.sampling.temperature);
    s.sampling.top_p = get_or<double>(sp, "top_p", s.sampling.top_p);
    s.sampling.max_tokens = get_or<int>(sp, "max_tokens", s.sampling.max_tokens);
  }
  validate(s);
  return s;
}

nlohmann::ordered_json to_json(const TaskSpec& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["kind"] = std::string(to_string(s.kind));
  j["labels"] = s.labels;
  j["templates"] = prompting::to_json(s.templates);
  j["rationale_count"] = s.rationale_count;
  j["rationales_per_query"] = s.rationales_per_query;
  j["seed_size"] = s.seed_size;
  j["ees_rounds"] = s.ees_rounds;
  j["qa_f1_threshold"] = s.qa_f1_threshold;
  j["dedup"] = s.dedup;
  if (s.rationale_prompt_count) j["rationale_prompt_count"] = *s.rationale_prompt_count;
  j["expansion"] = s.expansion;
  j["balance"] = s.balance;
  j["context_epochs"] = s.context_epochs;
  j["min_improvement"] = s.min_improvement;
  j["generation_attempts"] = s.generation_attempts;
  j["sampling"] = {{"temperature", s.sampling.temperature},
                   {"top_p", s.sampling.top_p},
                   {"max_tokens", s.sampling.max_tokens}};
  return j;
}

TaskSpec load_task_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open task spec " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return task_spec_from_json(j);
}

void save_task_spec(const TaskSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_json(spec).dump(2) << '\n';
}

}  // namespace s3
