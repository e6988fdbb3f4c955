#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "s3/core/task_spec.hpp"

namespace s3 {

enum class Stage { seed, add, gold_val, gold_test };

std::string_view to_string(Stage s) noexcept;
Stage stage_from_string(std::string_view s);

/// Where an example came from. `add` examples always name the validation error
/// they were extrapolated from.
struct Provenance {
  Stage stage = Stage::seed;
  int round = 0;
  std::optional<std::string> source_error_id;
  std::optional<std::string> prompt_hash;

  bool operator==(const Provenance&) const = default;
};

/// Throws ConfigError if the stage/round/source combination is inconsistent.
void validate(const Provenance& p);

struct TextLabel {
  std::string x;
  std::string y;
  bool operator==(const TextLabel&) const = default;
};

/// A target sentence conditioned on a context (premise, paragraph).
struct PairLabel {
  std::string context;
  std::string x;
  std::string y;
  bool operator==(const PairLabel&) const = default;
};

struct ContextQA {
  std::string context;
  std::string answer;
  std::string question;
  bool operator==(const ContextQA&) const = default;
};

using Payload = std::variant<TextLabel, PairLabel, ContextQA>;

TaskKind kind_of(const Payload& p) noexcept;

/// "text_label" / "pair_label" / "context_qa".
std::string_view record_kind(TaskKind k) noexcept;

struct Example {
  std::string id;
  Payload payload;
  Provenance provenance;

  /// Label for classification payloads, nullptr for QA.
  const std::string* label() const noexcept;
  /// The generated side of the example: x, or the question for QA.
  const std::string& target() const noexcept;
  /// Conditioning context, nullptr for single-text payloads.
  const std::string* context() const noexcept;

  bool operator==(const Example&) const = default;
};

/// Normalized payload text (trimmed, single-spaced fields plus label) used for dedup.
std::string payload_key(const Payload& p);

/// First 16 hex digits of the SHA-256 of the payload key.
std::string content_hash(const Payload& p);

}  // namespace s3
