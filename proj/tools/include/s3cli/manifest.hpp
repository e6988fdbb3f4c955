#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s3/llm/response_cache.hpp"

namespace s3::cli {

/// Run metadata written next to the outputs. Everything except the "timestamps"
/// section is a pure function of the inputs.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void set_config(nlohmann::ordered_json config) { config_ = std::move(config); }
  void add_seed(const std::string& stream, std::uint64_t value);
  void set_backend(std::string id) { backend_ = std::move(id); }
  void set_cache(const llm::CacheStats& stats) { cache_ = stats; }
  /// Digest `file`, stored under its path relative to `root`.
  void add_artifact(const std::filesystem::path& root, const std::filesystem::path& file);
  void finish();

  nlohmann::ordered_json to_json() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json seeds_ = nlohmann::ordered_json::object();
  std::string backend_;
  llm::CacheStats cache_;
  nlohmann::ordered_json artifacts_ = nlohmann::ordered_json::array();
  std::chrono::system_clock::time_point started_;
  std::chrono::system_clock::time_point finished_;
  std::chrono::steady_clock::time_point steady_start_;
  double wall_seconds_ = 0.0;
};

/// Artifacts whose digest no longer matches the file under `root` (empty when clean).
std::vector<std::string> verify_manifest(const std::filesystem::path& manifest, const std::filesystem::path& root);

/// Write pretty JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

}  // namespace s3::cli
