#include "s3/metrics/metrics.hpp"

#include <cctype>
#include <map>

#include "s3/common/error.hpp"
#include "s3/metrics/flops.hpp"

namespace s3::metrics {

std::vector<std::string> answer_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && cur != "a" && cur != "an" && cur != "the") tokens.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : s) {
    if (c < 0x80 && std::ispunct(c)) continue;  // deleted, not a separator
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      flush();
      continue;
    }
    cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
  }
  flush();
  return tokens;
}

std::string normalize_answer(std::string_view s) {
  std::string out;
  for (const auto& t : answer_tokens(s)) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

int exact_match(std::string_view pred, std::string_view gold) {
  return normalize_answer(pred) == normalize_answer(gold) ? 1 : 0;
}

double token_f1(std::string_view pred, std::string_view gold) {
  const auto p = answer_tokens(pred);
  const auto g = answer_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::map<std::string, long> bag;
  for (const auto& t : g) ++bag[t];
  long common = 0;
  for (const auto& t : p) {
    auto it = bag.find(t);
    if (it != bag.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(p.size());
  const double recall = static_cast<double>(common) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

double accuracy(std::span<const std::string> predicted, std::span<const std::string> gold) {
  if (predicted.size() != gold.size()) throw ConfigError("accuracy: predictions and gold are misaligned");
  if (gold.empty()) throw ConfigError("accuracy of an empty set is undefined");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += predicted[i] == gold[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

double MetricsReport::headline() const {
  if (accuracy) return *accuracy;
  if (f1) return *f1;
  throw InvariantError("metrics report without a headline metric");
}

nlohmann::ordered_json MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  if (accuracy) j["accuracy"] = *accuracy;
  if (em) j["em"] = *em;
  if (f1) j["f1"] = *f1;
  return j;
}

MetricsReport evaluate(std::span<const std::string> predicted, const Dataset& gold) {
  if (predicted.size() != gold.size()) {
    throw ConfigError("evaluate: " + std::to_string(predicted.size()) + " predictions for " +
                      std::to_string(gold.size()) + " gold examples");
  }
  if (gold.empty()) throw ConfigError("cannot evaluate against an empty gold set");
  MetricsReport r;
  r.n = gold.size();
  if (gold.task().is_classification()) {
    std::vector<std::string> labels;
    labels.reserve(gold.size());
    for (const auto& e : gold) labels.push_back(*e.label());
    r.accuracy = accuracy(predicted, labels);
  } else {
    double em = 0, f1 = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const auto& qa = std::get<ContextQA>(gold[i].payload);
      em += exact_match(predicted[i], qa.answer);
      f1 += token_f1(predicted[i], qa.answer);
    }
    r.em = em / static_cast<double>(gold.size());
    r.f1 = f1 / static_cast<double>(gold.size());
  }
  return r;
}

// ---------------------------------------------------------------- FLOPs

FlopsReport flops(double n_para, double seq_len, std::span<const FlopsStage> stages) {
  if (!(n_para > 0) || !(seq_len > 0)) throw ConfigError("flops: parameter count and sequence length must be positive");
  if (stages.empty()) throw ConfigError("flops: at least one stage is required");
  FlopsReport r;
  r.per_record_flops = kFlopsPerTokenPerParam * seq_len * n_para;
  for (const auto& s : stages) {
    if (!(s.records > 0) || !(s.epochs > 0)) throw ConfigError("flops: stage records and epochs must be positive");
    FlopsStageReport sr{s.records, s.epochs, r.per_record_flops * s.records * s.epochs};
    r.total += sr.flops;
    r.per_stage.push_back(sr);
  }
  return r;
}

nlohmann::ordered_json FlopsReport::to_json() const {
  nlohmann::ordered_json j;
  j["per_record_flops"] = per_record_flops;
  j["per_stage"] = nlohmann::ordered_json::array();
  for (const auto& s : per_stage) {
    j["per_stage"].push_back({{"records", s.records}, {"epochs", s.epochs}, {"flops", s.flops}});
  }
  j["total"] = total;
  return j;
}

}  // namespace s3::metrics
