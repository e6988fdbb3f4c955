#include "s3/trainer/naive_bayes.hpp"

#include <cmath>
#include <limits>

#include "s3/common/error.hpp"
#include "s3/common/text.hpp"

namespace s3::trainer {

std::vector<std::string> nb_features(const Example& e) {
  if (const auto* t = std::get_if<TextLabel>(&e.payload)) return text::word_tokens(t->x);
  if (const auto* p = std::get_if<PairLabel>(&e.payload)) {
    auto tokens = text::word_tokens(p->context);
    tokens.emplace_back(kPairSeparator);
    auto x = text::word_tokens(p->x);
    tokens.insert(tokens.end(), x.begin(), x.end());
    return tokens;
  }
  throw ConfigError("the builtin naive Bayes trainer does not support context_qa");
}

NaiveBayesModel::NaiveBayesModel(const Dataset& train, double alpha)
    : kind_(train.task().kind), alpha_(alpha), labels_(train.task().labels) {
  if (!(alpha > 0.0)) throw ConfigError("naive Bayes smoothing alpha must be positive");
  if (!train.task().is_classification()) {
    throw ConfigError("the builtin naive Bayes trainer does not support context_qa");
  }
  class_docs_.assign(labels_.size(), 0);
  class_tokens_.assign(labels_.size(), 0);
  for (const auto& e : train) {
    const auto c = *train.task().label_index(*e.label());
    ++class_docs_[c];
    ++total_docs_;
    for (auto& tok : nb_features(e)) {
      auto& counts = vocab_[tok];
      if (counts.empty()) counts.assign(labels_.size(), 0);
      ++counts[c];
      ++class_tokens_[c];
    }
  }
}

std::vector<double> NaiveBayesModel::log_scores(const std::vector<std::string>& tokens) const {
  const double v = static_cast<double>(vocab_.size());
  std::vector<double> scores(labels_.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < labels_.size(); ++c) {
    if (class_docs_[c] == 0) continue;
    double s = std::log(static_cast<double>(class_docs_[c]) / static_cast<double>(total_docs_));
    const double denom = std::log(static_cast<double>(class_tokens_[c]) + alpha_ * v);
    for (const auto& tok : tokens) {
      auto it = vocab_.find(tok);
      if (it == vocab_.end()) continue;
      s += std::log(static_cast<double>(it->second[c]) + alpha_) - denom;
    }
    scores[c] = s;
  }
  return scores;
}

std::size_t NaiveBayesModel::predict_index(const std::vector<std::string>& tokens) const {
  const auto scores = log_scores(tokens);
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return best;
}

PredictionSet NaiveBayesModel::predict(const Dataset& d) const {
  if (d.empty()) return {};
  if (d.task().kind != kind_) {
    throw ConfigError("model trained for " + std::string(to_string(kind_)) + " cannot predict " +
                      std::string(to_string(d.task().kind)) + " data");
  }
  PredictionSet out;
  out.predictions.reserve(d.size());
  for (const auto& e : d) {
    const auto scores = log_scores(nb_features(e));
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c) {
      if (scores[c] > scores[best]) best = c;
    }
    double z = 0.0;
    for (double s : scores) z += std::isinf(s) ? 0.0 : std::exp(s - scores[best]);
    out.predictions.push_back({labels_[best], 1.0 / z});
  }
  return out;
}

NaiveBayesTrainer::NaiveBayesTrainer(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0)) throw ConfigError("naive Bayes smoothing alpha must be positive");
}

std::unique_ptr<Model> NaiveBayesTrainer::train(const Dataset& d) {
  return std::make_unique<NaiveBayesModel>(d, alpha_);
}

}  // namespace s3::trainer
