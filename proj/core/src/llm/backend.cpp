#include "s3/llm/backend.hpp"

#include "s3/common/error.hpp"

namespace s3::llm {

GenerationRequest make_request(std::string prompt, const SamplingConfig& sampling, std::uint64_t sample_index,
                               int n) {
  GenerationRequest r;
  r.prompt = std::move(prompt);
  r.temperature = sampling.temperature;
  r.top_p = sampling.top_p;
  r.max_tokens = sampling.max_tokens;
  r.n = n;
  r.sample_index = sample_index;
  return r;
}

void validate(const GenerationRequest& req) {
  if (req.prompt.empty()) throw ConfigError("generation request with empty prompt");
  if (!(req.temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (!(req.top_p > 0.0 && req.top_p <= 1.0)) throw ConfigError("top_p must lie in (0, 1]");
  if (req.max_tokens <= 0) throw ConfigError("max_tokens must be positive");
  if (req.n <= 0) throw ConfigError("n must be positive");
}

std::vector<std::string> generate(Backend& backend, const GenerationRequest& req) {
  validate(req);
  auto out = backend.generate(req);
  if (out.size() != static_cast<std::size_t>(req.n)) {
    throw BackendError(BackendErrorKind::protocol, "backend " + backend.id() + " returned " +
                                                       std::to_string(out.size()) + " completions, expected " +
                                                       std::to_string(req.n));
  }
  return out;
}

}  // namespace s3::llm
