#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "s3/llm/remote_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

#include "s3/common/error.hpp"

namespace s3::llm {

RemoteConfig remote_config_from_env(RemoteConfig base) {
  if (const char* url = std::getenv(kBaseUrlEnv); url && *url) base.base_url = url;
  if (base.api_key.empty()) {
    if (const char* key = std::getenv(kApiKeyEnv); key && *key) base.api_key = key;
  }
  if (base.api_key.empty()) {
    throw BackendError(BackendErrorKind::auth,
                       std::string("remote backend selected but ") + kApiKeyEnv + " is not set");
  }
  return base;
}

RemoteBackend::RemoteBackend(RemoteConfig cfg, Sleeper sleeper) : cfg_(std::move(cfg)), sleep_(std::move(sleeper)) {
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  const auto scheme_end = cfg_.base_url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base URL needs a scheme: " + cfg_.base_url);
  const auto path_start = cfg_.base_url.find('/', scheme_end + 3);
  scheme_host_port_ = cfg_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? std::string() : cfg_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (cfg_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
}

std::chrono::milliseconds RemoteBackend::backoff(int attempt) const {
  const double ms = static_cast<double>(cfg_.backoff_base.count()) * std::pow(cfg_.backoff_factor, attempt);
  return std::chrono::milliseconds(
      static_cast<long long>(std::min(ms, static_cast<double>(cfg_.backoff_cap.count()))));
}

namespace {

BackendError classify(int status, const std::string& body) {
  const std::string snippet = body.substr(0, 200);
  if (status == 401 || status == 403) {
    return BackendError(BackendErrorKind::auth, "HTTP " + std::to_string(status) + " (check " + kApiKeyEnv + "): " + snippet);
  }
  if (status == 429) return BackendError(BackendErrorKind::rate_limit, "HTTP 429 rate limited: " + snippet);
  if (status == 408 || status == 504) {
    return BackendError(BackendErrorKind::timeout, "HTTP " + std::to_string(status) + " timeout: " + snippet);
  }
  if (status == 400 && (body.find("context_length") != std::string::npos ||
                        body.find("maximum context") != std::string::npos)) {
    return BackendError(BackendErrorKind::prompt_too_long, "prompt exceeds the model context window: " + snippet);
  }
  return BackendError(BackendErrorKind::http, "HTTP " + std::to_string(status) + ": " + snippet);
}

bool retryable(const BackendError& e, int status) {
  if (e.kind() == BackendErrorKind::rate_limit || e.kind() == BackendErrorKind::timeout) return true;
  return e.kind() == BackendErrorKind::http && (status == 0 || status >= 500);
}

}  // namespace

std::vector<std::string> RemoteBackend::generate(const GenerationRequest& req) {
  if (cfg_.max_prompt_chars > 0 && req.prompt.size() > cfg_.max_prompt_chars) {
    throw BackendError(BackendErrorKind::prompt_too_long,
                       "prompt of " + std::to_string(req.prompt.size()) + " bytes exceeds max_prompt_chars=" +
                           std::to_string(cfg_.max_prompt_chars));
  }
  nlohmann::json body;
  body["model"] = cfg_.model;
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", req.prompt}}});
  body["temperature"] = req.temperature;
  body["top_p"] = req.top_p;
  body["max_tokens"] = req.max_tokens;
  body["n"] = req.n;
  if (!req.stop.empty()) body["stop"] = req.stop;
  const std::string payload = body.dump();
  const std::string path = path_prefix_ + "/chat/completions";

  std::optional<BackendError> last;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) sleep_(backoff(attempt - 1));
    httplib::Client client(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers{{"Authorization", "Bearer " + cfg_.api_key}};

    auto res = client.Post(path, headers, payload, "application/json");
    int status = 0;
    if (!res) {
      const auto err = res.error();
      last = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
                 ? BackendError(BackendErrorKind::timeout, "request timed out: " + httplib::to_string(err))
                 : BackendError(BackendErrorKind::http, "transport error: " + httplib::to_string(err));
    } else if (res->status != 200) {
      status = res->status;
      last = classify(res->status, res->body);
    } else {
      try {
        auto j = nlohmann::json::parse(res->body);
        std::vector<std::string> out;
        for (const auto& choice : j.at("choices")) {
          if (choice.contains("message")) {
            out.push_back(choice.at("message").at("content").get<std::string>());
          } else {
            out.push_back(choice.at("text").get<std::string>());
          }
        }
        if (out.size() != static_cast<std::size_t>(req.n)) {
          throw BackendError(BackendErrorKind::protocol, "server returned " + std::to_string(out.size()) +
                                                             " choices, expected " + std::to_string(req.n));
        }
        return out;
      } catch (const nlohmann::json::exception& e) {
        throw BackendError(BackendErrorKind::protocol, std::string("unparseable completion response: ") + e.what());
      }
    }
    if (!retryable(*last, status)) throw *last;
  }
  throw BackendError(last->kind(), std::string(last->what()) + " (after " + std::to_string(cfg_.max_retries + 1) +
                                       " attempts)");
}

}  // namespace s3::llm
