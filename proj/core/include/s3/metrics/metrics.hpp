#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "s3/core/dataset.hpp"

namespace s3::metrics {

/// Lowercase, delete ASCII punctuation, drop the articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view s);

/// Whitespace tokens of the normalized answer.
std::vector<std::string> answer_tokens(std::string_view s);

/// 1 iff the normalized strings are equal.
int exact_match(std::string_view pred, std::string_view gold);

/// Harmonic mean of bag-of-token precision and recall over normalized tokens.
/// Both empty -> 1, exactly one empty -> 0.
double token_f1(std::string_view pred, std::string_view gold);

/// Fraction of positions where predicted == gold. Throws on empty or misaligned input.
double accuracy(std::span<const std::string> predicted, std::span<const std::string> gold);

struct MetricsReport {
  std::size_t n = 0;
  std::optional<double> accuracy;  ///< classification kinds
  std::optional<double> em;        ///< context_qa
  std::optional<double> f1;        ///< context_qa

  /// Accuracy for classification, F1 for QA.
  double headline() const;
  nlohmann::ordered_json to_json() const;
};

/// Score order-aligned predictions (labels, or answer texts for QA) against gold.
MetricsReport evaluate(std::span<const std::string> predicted, const Dataset& gold);

}  // namespace s3::metrics
