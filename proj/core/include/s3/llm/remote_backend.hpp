#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "s3/llm/backend.hpp"

namespace s3::llm {

inline constexpr const char* kApiKeyEnv = "S3_LLM_API_KEY";
inline constexpr const char* kBaseUrlEnv = "S3_LLM_BASE_URL";

struct RemoteConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo";
  std::string api_key;
  std::chrono::milliseconds timeout{60'000};
  /// Retries after the first attempt for rate limits, timeouts and 5xx.
  int max_retries = 4;
  std::chrono::milliseconds backoff_base{500};
  double backoff_factor = 2.0;
  std::chrono::milliseconds backoff_cap{30'000};
  /// Prompts longer than this (in bytes) are rejected instead of truncated. 0 = no limit.
  std::size_t max_prompt_chars = 32'000;
};

/// Fill api_key / base_url from S3_LLM_API_KEY / S3_LLM_BASE_URL. Throws
/// BackendError(auth) naming S3_LLM_API_KEY when no key is available.
RemoteConfig remote_config_from_env(RemoteConfig base = {});

/// OpenAI-compatible chat/completions client.
class RemoteBackend final : public Backend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit RemoteBackend(RemoteConfig cfg, Sleeper sleeper = {});

  std::vector<std::string> generate(const GenerationRequest& req) override;
  std::string id() const override { return "remote:" + cfg_.model; }

  const RemoteConfig& config() const noexcept { return cfg_; }

 private:
  std::chrono::milliseconds backoff(int attempt) const;

  RemoteConfig cfg_;
  Sleeper sleep_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

}  // namespace s3::llm
