#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "s3/core/dataset.hpp"

namespace s3::diversity {

/// id -> vector, uniform dimension.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  explicit EmbeddingSet(std::size_t dim);

  void insert(std::string id, std::vector<double> v);
  const std::vector<double>* find(std::string_view id) const;
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  bool empty() const noexcept { return vectors_.empty(); }
  /// Sorted by id.
  const std::map<std::string, std::vector<double>, std::less<>>& entries() const noexcept { return vectors_; }

 private:
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<double>, std::less<>> vectors_;
};

/// JSONL of {id, vector:[...]}.
EmbeddingSet load_embeddings(const std::filesystem::path& path);
void save_embeddings(const EmbeddingSet& e, const std::filesystem::path& path);

inline constexpr std::size_t kHashedDim = 256;

/// Feature-hashed bag of words: FNV-1a bucket, sign from a second hash bit, L2-normalized.
std::vector<double> hashed_embedding(std::string_view text, std::size_t dim = kHashedDim);

/// The text an example contributes to diversity analyses (x, or the question for QA).
std::string_view analysis_text(const Example& e);

/// Hashed embeddings of every example, keyed by example id.
EmbeddingSet embed(const Dataset& d, std::size_t dim = kHashedDim);

/// Throws on dimension mismatch or a zero vector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Levenshtein distance over Unicode code points.
std::size_t edit_distance(std::string_view a, std::string_view b);

struct PairQuality {
  std::string add_id;
  std::string mis_id;
  double cos_sim = 0.0;
  std::size_t edit_dist = 0;
  std::size_t len_mis = 0;
  std::size_t len_add = 0;
};

struct DiversityReport {
  std::size_t n_pairs = 0;
  double avg_cos_sim = 0.0;
  double avg_edit_dist = 0.0;
  double avg_len_mis = 0.0;
  double avg_len_add = 0.0;
  std::vector<PairQuality> pairs;

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

/// Pairs every add example with its source error in `mis` and averages cosine
/// similarity, edit distance and character lengths. Embeddings are looked up by
/// example id.
DiversityReport quality_report(const Dataset& mis, const Dataset& add, const EmbeddingSet& emb);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using Projection = std::map<std::string, Point2, std::less<>>;

/// Mean-centered projection onto the two leading principal axes. Axis signs are
/// fixed so the largest-magnitude loading is positive.
Projection project_pca(const EmbeddingSet& emb);

/// JSONL of {id, x, y}.
Projection load_coords(const std::filesystem::path& path);
void save_coords(const Projection& p, const std::filesystem::path& path);

/// Restrict an external projection to the ids of `emb`; throws naming a missing id.
Projection project_external(const EmbeddingSet& emb, const Projection& coords);

/// Fraction of gold points within Euclidean distance gamma of some synthesized point.
double coverage_rate(std::span<const Point2> gold, std::span<const Point2> syn, double gamma);

/// Median nearest-neighbour distance within the gold set (needs >= 2 points).
double default_gamma(std::span<const Point2> gold);

std::vector<Point2> points_of(const Projection& p);

}  // namespace s3::diversity
