#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "s3/trainer/trainer.hpp"

namespace s3::trainer {

/// Token features for the builtin model. Pair examples are context tokens, a
/// separator token, then target tokens.
std::vector<std::string> nb_features(const Example& e);

inline constexpr const char* kPairSeparator = "[sep]";

/// Multinomial naive Bayes over lowercased word tokens with Laplace smoothing.
/// Out-of-vocabulary tokens are ignored; classes absent from training are never
/// predicted; ties go to the lower label index.
class NaiveBayesModel final : public Model {
 public:
  NaiveBayesModel(const Dataset& train, double alpha);

  PredictionSet predict(const Dataset& d) const override;
  TaskKind kind() const override { return kind_; }

  /// Unnormalized log posterior per label (label-set order); -inf for unseen classes.
  std::vector<double> log_scores(const std::vector<std::string>& tokens) const;
  std::size_t predict_index(const std::vector<std::string>& tokens) const;

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t vocabulary_size() const noexcept { return vocab_.size(); }

 private:
  TaskKind kind_;
  double alpha_;
  std::vector<std::string> labels_;
  std::vector<std::uint64_t> class_docs_;
  std::vector<std::uint64_t> class_tokens_;
  std::uint64_t total_docs_ = 0;
  /// token -> per-class counts
  std::unordered_map<std::string, std::vector<std::uint64_t>> vocab_;
};

class NaiveBayesTrainer final : public Trainer {
 public:
  explicit NaiveBayesTrainer(double alpha = 1.0);
  std::unique_ptr<Model> train(const Dataset& d) override;
  std::string name() const override { return "builtin_nb"; }

 private:
  double alpha_;
};

}  // namespace s3::trainer
