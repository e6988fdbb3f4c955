#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "s3/core/dataset.hpp"
#include "s3/llm/backend.hpp"

namespace s3::synthesis {

/// K distinct rationale phrases per label.
using RationaleSet = std::map<std::string, std::vector<std::string>>;

nlohmann::ordered_json to_json(const RationaleSet& r, const TaskSpec& spec);
RationaleSet rationales_from_json(const nlohmann::json& j);

/// A conditioning context: a premise/paragraph, plus the answer span for QA.
struct ContextRecord {
  std::string context;
  std::optional<std::string> answer;
};

struct ContextPool {
  std::vector<ContextRecord> contexts;
};

/// JSONL of {context, answer?}.
ContextPool load_context_pool(const std::filesystem::path& path);

struct SynthesisOptions {
  /// Concurrent generation requests.
  std::size_t parallel = 4;
  bool strip_echo = true;
  /// Shortest prompt tail treated as an echo.
  std::size_t min_echo_chars = 12;
  /// Re-query budget for rationale lists.
  std::size_t rationale_attempts = 3;
};

/// Strip an echoed prompt tail, a leading "Review:"-style field name and
/// surrounding quotes from a completion.
std::string clean_completion(std::string_view completion, std::string_view prompt, const SynthesisOptions& opts = {});

/// One K-list per label via the rationale prompt.
RationaleSet synthesize_rationales(const TaskSpec& spec, llm::Backend& backend, const SynthesisOptions& opts = {});

/// Rationale-guided seed set for single-text tasks: exactly seed_size examples.
Dataset synthesize_seed(std::shared_ptr<const TaskSpec> spec, const RationaleSet& rationales, llm::Backend& backend,
                        std::uint64_t rng_seed, const SynthesisOptions& opts = {});

/// Context-conditioned seed set for pair and QA tasks.
Dataset synthesize_seed_conditional(std::shared_ptr<const TaskSpec> spec, const ContextPool& pool,
                                    llm::Backend& backend, std::uint64_t rng_seed, const SynthesisOptions& opts = {});

/// First 16 hex digits of the prompt's SHA-256, as stored in provenance.
std::string prompt_hash(std::string_view prompt);

}  // namespace s3::synthesis
