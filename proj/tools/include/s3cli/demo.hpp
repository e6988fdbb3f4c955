#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>

#include "s3/core/dataset.hpp"
#include "s3/ees/ees.hpp"
#include "s3/llm/scripted_oracle.hpp"
#include "s3/synthesis/seed.hpp"
#include "s3cli/manifest.hpp"

namespace s3::cli {

/// Offline two-label movie-review task. The scripted oracle never proposes a
/// negative rationale about the soundtrack, so the seed set lacks negative
/// soundtrack reviews while the gold splits contain them.
struct DemoScenario {
  std::shared_ptr<const TaskSpec> task;
  llm::OracleScript oracle;
  Dataset gold_val;
  Dataset gold_test;
};

struct DemoOptions {
  std::uint64_t seed = 42;
  std::size_t parallel = 4;
  std::size_t seed_size = 200;
  std::size_t val_size = 100;
  std::size_t test_size = 100;
  std::size_t rounds = 2;
  std::filesystem::path out_dir = "demo-out";
  std::optional<std::filesystem::path> cache;
};

DemoScenario make_demo_scenario(const DemoOptions& opts);

struct DemoOutcome {
  synthesis::RationaleSet rationales;
  Dataset seed;
  ees::EesResult ees;
  metrics::MetricsReport seed_only_test;
  metrics::MetricsReport ees_test;
  RunManifest manifest;
};

/// Runs seed synthesis and EES end to end and writes every artifact plus
/// manifest.json under opts.out_dir.
DemoOutcome run_demo(const DemoOptions& opts);

}  // namespace s3::cli
