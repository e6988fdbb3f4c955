#include "s3cli/manifest.hpp"

#include <ctime>
#include <fstream>

#include "s3/common/error.hpp"
#include "s3/common/hash.hpp"

namespace s3::cli {

namespace {

std::string iso8601(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunManifest::RunManifest(std::string command)
    : command_(std::move(command)),
      started_(std::chrono::system_clock::now()),
      finished_(started_),
      steady_start_(std::chrono::steady_clock::now()) {}

void RunManifest::add_seed(const std::string& stream, std::uint64_t value) { seeds_[stream] = value; }

void RunManifest::add_artifact(const std::filesystem::path& root, const std::filesystem::path& file) {
  nlohmann::ordered_json a;
  a["path"] = std::filesystem::relative(file, root).generic_string();
  a["sha256"] = sha256_file(file);
  a["bytes"] = std::filesystem::file_size(file);
  artifacts_.push_back(std::move(a));
}

void RunManifest::finish() {
  finished_ = std::chrono::system_clock::now();
  wall_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - steady_start_).count();
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "s3-manifest";
  j["schema_version"] = 1;
  j["command"] = command_;
  j["config"] = config_;
  j["seeds"] = seeds_;
  j["backend"] = backend_;
  j["cache"] = {{"hits", cache_.hits}, {"misses", cache_.misses}, {"loaded", cache_.loaded},
                {"corrupt", cache_.corrupt}};
  j["artifacts"] = artifacts_;
  j["timestamps"] = {{"started", iso8601(started_)}, {"finished", iso8601(finished_)},
                     {"wall_seconds", wall_seconds_}};
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const { write_json(path, to_json()); }

std::vector<std::string> verify_manifest(const std::filesystem::path& manifest, const std::filesystem::path& root) {
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw ConfigError("cannot open manifest " + manifest.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("manifest " + manifest.string() + ": " + e.what());
  }
  std::vector<std::string> bad;
  for (const auto& a : j.at("artifacts")) {
    const auto rel = a.at("path").get<std::string>();
    const auto p = root / rel;
    if (!std::filesystem::exists(p) || sha256_file(p) != a.at("sha256").get<std::string>()) bad.push_back(rel);
  }
  return bad;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path.string());
}

}  // namespace s3::cli
