#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "s3/core/task_spec.hpp"

namespace s3::llm {

/// One sampling call against an LLM: prompt plus decoding parameters.
struct GenerationRequest {
  std::string prompt;
  double temperature = 0.9;
  double top_p = 1.0;
  int max_tokens = 256;
  int n = 1;
  /// Distinguishes repeated samples of the same prompt (cache key, oracle draw).
  std::uint64_t sample_index = 0;
  std::vector<std::string> stop;
};

GenerationRequest make_request(std::string prompt, const SamplingConfig& sampling, std::uint64_t sample_index,
                               int n = 1);

void validate(const GenerationRequest& req);

/// Something that samples text given a prompt. Implementations must tolerate
/// concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;

  /// Returns exactly req.n completions.
  virtual std::vector<std::string> generate(const GenerationRequest& req) = 0;

  /// Stable identity, part of the cache key.
  virtual std::string id() const = 0;
};

/// Validates the request and the completion count around backend.generate().
std::vector<std::string> generate(Backend& backend, const GenerationRequest& req);

/// Pass-through that counts calls reaching the wrapped backend.
class CountingBackend final : public Backend {
 public:
  explicit CountingBackend(Backend& inner) : inner_(inner) {}

  std::vector<std::string> generate(const GenerationRequest& req) override {
    ++calls_;
    return inner_.generate(req);
  }
  std::string id() const override { return inner_.id(); }
  std::uint64_t calls() const noexcept { return calls_.load(); }

 private:
  Backend& inner_;
  std::atomic<std::uint64_t> calls_{0};
};

}  // namespace s3::llm
