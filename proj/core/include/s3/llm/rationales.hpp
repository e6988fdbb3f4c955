#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "s3/core/task_spec.hpp"
#include "s3/llm/backend.hpp"
#include "s3/prompting/template.hpp"

namespace s3::llm {

/// Phrases from lines prefixed "N.", "N)", "-" or "*"; lowercased, trimmed of
/// numbering, quotes and trailing punctuation. Unprefixed lines are ignored.
std::vector<std::string> parse_rationale_lines(std::string_view completion);

struct RationaleOptions {
  std::size_t attempt_budget = 3;
  /// Value bound to `<X>` in the rationale prompt; defaults to K.
  std::optional<std::size_t> prompt_count;
  SamplingConfig sampling;
};

/// Ask for reasons behind `label` and return exactly K distinct phrases, re-querying
/// with fresh sample indices until K are collected or the budget runs out.
std::vector<std::string> top_k_rationales(Backend& backend, std::string_view label,
                                          const prompting::PromptTemplate& t, std::size_t k_total,
                                          const RationaleOptions& opts = {});

}  // namespace s3::llm
