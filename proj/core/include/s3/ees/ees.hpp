#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s3/core/dataset.hpp"
#include "s3/llm/backend.hpp"
#include "s3/metrics/metrics.hpp"
#include "s3/synthesis/seed.hpp"
#include "s3/trainer/trainer.hpp"

namespace s3::ees {

/// Stride between rounds in the sample-index space of extrapolation requests.
inline constexpr std::uint64_t kRoundStride = std::uint64_t{1} << 20;

struct ExtrapolationResult {
  Dataset added;
  std::size_t requested = 0;
  /// Requests that produced no usable example within the attempt budget.
  std::size_t failures = 0;
};

/// Writes `expansion` new examples per error using the mis template. New examples
/// keep the error's label (and context/answer), carry stage=add, round=round+1 and
/// the error id. `round` is the zero-based pass that produced the errors.
ExtrapolationResult extrapolate_errors(const trainer::MisclassifiedSet& mis, std::shared_ptr<const TaskSpec> spec,
                                       llm::Backend& backend, std::size_t round,
                                       const synthesis::SynthesisOptions& opts = {});

/// The prompt that extrapolates one error (exposed for inspection and tests).
std::string extrapolation_prompt(const Example& error, const TaskSpec& spec);

enum class StopReason { none, rounds_exhausted, no_errors, no_improvement };
std::string_view to_string(StopReason r) noexcept;

struct RoundReport {
  std::size_t round = 0;  ///< pass index q; pass 0 trains on the seed only
  std::size_t train_size = 0;
  std::size_t seed_size = 0;
  std::size_t added_total = 0;
  metrics::MetricsReport val;
  std::optional<metrics::MetricsReport> test;
  std::size_t errors = 0;
  bool extrapolated = false;
  std::size_t added_this_round = 0;
  std::size_t failures = 0;
  StopReason stop = StopReason::none;

  nlohmann::ordered_json to_json() const;
};

struct EesOptions {
  /// Extrapolation rounds R. Passes run for q = 0..R.
  std::size_t rounds = 2;
  bool dedup = false;
  double min_improvement = 0.005;
  synthesis::SynthesisOptions synthesis;
};

EesOptions ees_options_from(const TaskSpec& spec);

struct EesResult {
  Dataset train;
  std::vector<RoundReport> reports;
  /// Per extrapolation round: the errors and the examples written for them.
  std::vector<trainer::MisclassifiedSet> errors;
  std::vector<Dataset> additions;

  const RoundReport& final_report() const { return reports.back(); }
  nlohmann::ordered_json to_json() const;
};

/// The error-extrapolation loop: train on seed plus additions, collect validation
/// errors, extrapolate them, repeat. The test split is scored but never consulted.
EesResult run_ees(std::shared_ptr<const TaskSpec> spec, const Dataset& seed, const Dataset& val,
                  const Dataset* test, trainer::Trainer& trainer, llm::Backend& backend, const EesOptions& opts);

}  // namespace s3::ees
