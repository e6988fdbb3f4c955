#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace s3::prompting {

/// The five prompt roles. ration/query1/mis1 drive single-text tasks,
/// query2/mis2 drive pair and context-QA tasks.
enum class Role { ration, query1, query2, mis1, mis2 };

std::string_view to_string(Role r) noexcept;
Role role_from_string(std::string_view s);

/// A prompt body with `<X>`, `<Y>` and `<X["field"]>` placeholders. A two-character
/// `\n` sequence in the body renders as a newline.
struct PromptTemplate {
  Role role = Role::query1;
  std::string body;
  /// Internal label -> label word substituted for `<Y>` (e.g. entailment -> "in").
  std::map<std::string, std::string> label_map;

  bool operator==(const PromptTemplate&) const = default;
};

using TemplateSet = std::map<Role, PromptTemplate>;

/// Binding keys are the placeholder text between the angle brackets.
using Bindings = std::map<std::string, std::string, std::less<>>;

namespace key {
inline constexpr std::string_view x = "X";
inline constexpr std::string_view y = "Y";
inline constexpr std::string_view premise = R"(X["premise"])";
inline constexpr std::string_view question = R"(X["question"])";
inline constexpr std::string_view hypothesis = R"(X["Hypothesis"])";
inline constexpr std::string_view context = R"(X["context"])";
inline constexpr std::string_view answer = R"(X["answer"])";
}  // namespace key

/// Recognized placeholder keys, in declaration order.
const std::vector<std::string_view>& recognized_placeholders();

/// Distinct placeholder keys used by `body`, in first-occurrence order.
/// Throws ConfigError on a `<X["..."]>` whose field is not recognized.
std::vector<std::string> placeholders(std::string_view body);

struct RenderOptions {
  /// Reject bindings for placeholders the template does not use.
  bool strict = false;
};

/// Substitute bindings verbatim. `<Y>` values pass through the template's label_map.
std::string render(const PromptTemplate& t, const Bindings& bindings, RenderOptions opts = {});

struct BuiltinTemplates {
  TemplateSet templates;
  /// Default internal label set; empty for extractive QA.
  std::vector<std::string> labels;
};

/// Stock prompts for "imdb", "qnli", "rte" and "adqa".
BuiltinTemplates builtin_templates(std::string_view dataset_name);

/// Parse a role -> {body, label_map} override map.
TemplateSet templates_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const TemplateSet& set);

/// Read a template override file (JSON map role -> {body, label_map}).
TemplateSet load_template_overrides(const std::filesystem::path& path);

}  // namespace s3::prompting
