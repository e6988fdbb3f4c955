#include "s3/llm/response_cache.hpp"

#include <future>
#include <sstream>

#include <nlohmann/json.hpp>

#include "s3/common/error.hpp"
#include "s3/common/hash.hpp"

namespace s3::llm {

namespace {

std::string fmt_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string request_digest(const GenerationRequest& req, std::string_view backend_id) {
  std::string d;
  d += std::string(backend_id);
  d += "|t=" + fmt_real(req.temperature);
  d += "|p=" + fmt_real(req.top_p);
  d += "|max=" + std::to_string(req.max_tokens);
  d += "|n=" + std::to_string(req.n);
  d += "|i=" + std::to_string(req.sample_index);
  d += "|prompt=" + sha256_hex(req.prompt).substr(0, 16);
  return d;
}

std::string cache_key(const GenerationRequest& req, std::string_view backend_id) {
  // Length-prefix the prompt so no prompt text can masquerade as another field.
  std::string material = request_digest(req, backend_id);
  material += "|" + std::to_string(req.prompt.size()) + ":" + req.prompt;
  return sha256_hex(material);
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        auto j = nlohmann::json::parse(line);
        auto key = j.at("key").get<std::string>();
        auto completions = j.at("completions").get<std::vector<std::string>>();
        entries_[std::move(key)] = std::move(completions);
        ++stats_.loaded;
      } catch (const nlohmann::json::exception&) {
        ++stats_.corrupt;
      }
    }
  }
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw ConfigError("cannot open cache file " + path_.string());
}

std::optional<std::vector<std::string>> ResponseCache::lookup(const std::string& key) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    ++stats_.misses;
    return std::nullopt;
  }
  ++stats_.hits;
  return it->second;
}

void ResponseCache::store(const std::string& key, const std::string& digest,
                          const std::vector<std::string>& completions) {
  std::lock_guard lock(mu_);
  entries_[key] = completions;
  if (out_.is_open()) {
    nlohmann::ordered_json j;
    j["key"] = key;
    j["request_digest"] = digest;
    j["completions"] = completions;
    out_ << j.dump() << '\n';
    out_.flush();
  }
}

CacheStats ResponseCache::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::vector<std::string> CachedBackend::generate(const GenerationRequest& req) {
  const auto key = cache_key(req, inner_->id());
  std::promise<std::vector<std::string>> promise;
  {
    std::unique_lock lock(mu_);
    if (auto it = inflight_.find(key); it != inflight_.end()) {
      auto shared = it->second;
      lock.unlock();
      return shared.get();
    }
    if (auto hit = cache_->lookup(key)) return *hit;
    inflight_.emplace(key, promise.get_future().share());
  }
  try {
    auto out = inner_->generate(req);
    cache_->store(key, request_digest(req, inner_->id()), out);
    promise.set_value(out);
    std::lock_guard lock(mu_);
    inflight_.erase(key);
    return out;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(mu_);
    inflight_.erase(key);
    throw;
  }
}

}  // namespace s3::llm
