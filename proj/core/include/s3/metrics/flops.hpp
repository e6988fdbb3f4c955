#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace s3::metrics {

/// Training cost of a transformer: 6 FLOPs per token per parameter.
inline constexpr double kFlopsPerTokenPerParam = 6.0;

struct FlopsStage {
  double records = 0;
  double epochs = 0;
};

struct FlopsStageReport {
  double records = 0;
  double epochs = 0;
  double flops = 0;
};

struct FlopsReport {
  double per_record_flops = 0;
  std::vector<FlopsStageReport> per_stage;
  double total = 0;

  nlohmann::ordered_json to_json() const;
};

/// per_record = 6 * seq_len * n_para; stage = per_record * records * epochs.
FlopsReport flops(double n_para, double seq_len, std::span<const FlopsStage> stages);

}  // namespace s3::metrics
