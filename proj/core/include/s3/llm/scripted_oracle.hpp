#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "s3/llm/backend.hpp"

namespace s3::llm {

/// Canned completions for prompts matching a substring (or ECMAScript regex).
/// Responses are served cyclically by sample index.
struct OracleRule {
  std::string match;
  bool regex = false;
  std::vector<std::string> responses;
};

/// A group of interchangeable texts for one label. `cues` select the cluster when
/// they occur in an unconditioned prompt (e.g. a rationale mentioning "soundtrack").
struct OracleCluster {
  std::string name;
  std::string label;
  std::vector<std::string> cues;
  /// Relative weight when generating for this label without an exemplar.
  double weight = 1.0;
  std::vector<std::string> atoms;
};

/// Label-conditioned discrete text distribution. Prompts carrying `similar_marker`
/// followed by an exemplar sample from the exemplar's cluster instead.
struct DistributionalSpec {
  /// (label, cue) pairs; the first cue found before the marker names the label.
  std::vector<std::pair<std::string, std::string>> label_cues;
  std::string similar_marker = "similar to:";
  std::vector<OracleCluster> clusters;
};

struct OracleScript {
  std::vector<OracleRule> rules;
  std::optional<DistributionalSpec> distributional;
  std::uint64_t rng_seed = 0;
};

OracleScript oracle_script_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const OracleScript& s);
OracleScript load_oracle_script(const std::filesystem::path& path);

/// Offline, deterministic LLM stand-in. Output depends only on
/// (script, rng_seed, prompt, sample_index), never on call order.
class ScriptedOracle final : public Backend {
 public:
  explicit ScriptedOracle(OracleScript script);

  std::vector<std::string> generate(const GenerationRequest& req) override;
  std::string id() const override { return id_; }

  const OracleScript& script() const noexcept { return script_; }

 private:
  std::string sample_distribution(const std::string& prompt, std::uint64_t draw) const;

  OracleScript script_;
  std::vector<std::optional<std::regex>> compiled_;
  std::string id_;
};

}  // namespace s3::llm
