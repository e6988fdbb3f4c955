#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "s3/llm/backend.hpp"

namespace s3::llm {

/// Hash over prompt, temperature, top_p, max_tokens, n, sample_index and backend id.
std::string cache_key(const GenerationRequest& req, std::string_view backend_id);

/// Human-readable summary stored next to the key.
std::string request_digest(const GenerationRequest& req, std::string_view backend_id);

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t loaded = 0;
  std::uint64_t corrupt = 0;
};

/// Append-only JSONL store of {key, request_digest, completions}. A damaged line
/// invalidates only itself. Writes are serialized.
class ResponseCache {
 public:
  /// Loads existing records from `path` (if present) and appends new ones to it.
  explicit ResponseCache(std::filesystem::path path);
  /// Memory-only cache.
  ResponseCache() = default;

  std::optional<std::vector<std::string>> lookup(const std::string& key);
  void store(const std::string& key, const std::string& digest, const std::vector<std::string>& completions);

  CacheStats stats() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::filesystem::path path_;
  std::ofstream out_;
  std::unordered_map<std::string, std::vector<std::string>> entries_;
  CacheStats stats_;
};

/// Serves repeated requests from the cache; only misses reach the inner backend.
/// Concurrent requests for the same key share one inner call.
class CachedBackend final : public Backend {
 public:
  CachedBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  std::vector<std::string> generate(const GenerationRequest& req) override;
  std::string id() const override { return inner_->id(); }

  const ResponseCache& cache() const noexcept { return *cache_; }

 private:
  std::shared_ptr<Backend> inner_;
  std::shared_ptr<ResponseCache> cache_;
  std::mutex mu_;
  std::unordered_map<std::string, std::shared_future<std::vector<std::string>>> inflight_;
};

}  // namespace s3::llm
