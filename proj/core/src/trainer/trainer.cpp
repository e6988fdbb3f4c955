#include "s3/trainer/trainer.hpp"

#include "s3/common/error.hpp"
#include "s3/metrics/metrics.hpp"
#include "s3/trainer/external.hpp"
#include "s3/trainer/naive_bayes.hpp"

namespace s3::trainer {

void validate(const TrainerConfig& cfg) {
  if (cfg.backend == BackendKind::builtin_nb && !(cfg.alpha > 0.0)) {
    throw ConfigError("trainer alpha must be positive");
  }
  if (cfg.backend == BackendKind::external && cfg.external_cmd.empty()) {
    throw ConfigError("external trainer selected but no external_cmd given");
  }
  if (!cfg.hyperparameters.is_object()) throw ConfigError("trainer hyperparameters must be a JSON object");
}

TrainerConfig trainer_config_from_json(const nlohmann::json& j) {
  TrainerConfig c;
  try {
    const auto backend = j.value("backend", std::string("builtin_nb"));
    if (backend == "builtin_nb") {
      c.backend = BackendKind::builtin_nb;
    } else if (backend == "external") {
      c.backend = BackendKind::external;
    } else {
      throw ConfigError("unknown trainer backend '" + backend + "'");
    }
    c.alpha = j.value("alpha", c.alpha);
    c.external_cmd = j.value("external_cmd", std::string());
    if (j.contains("hyperparameters")) c.hyperparameters = j["hyperparameters"];
    c.inline_limit = j.value("inline_limit", c.inline_limit);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("trainer config: ") + e.what());
  }
  validate(c);
  return c;
}

nlohmann::ordered_json to_json(const TrainerConfig& c) {
  nlohmann::ordered_json j;
  j["backend"] = c.backend == BackendKind::builtin_nb ? "builtin_nb" : "external";
  if (c.backend == BackendKind::builtin_nb) {
    j["alpha"] = c.alpha;
  } else {
    j["external_cmd"] = c.external_cmd;
    j["hyperparameters"] = c.hyperparameters;
    j["inline_limit"] = c.inline_limit;
  }
  return j;
}

std::vector<std::string> PredictionSet::values() const {
  std::vector<std::string> v;
  v.reserve(predictions.size());
  for (const auto& p : predictions) v.push_back(p.value);
  return v;
}

std::unique_ptr<Trainer> make_trainer(const TrainerConfig& cfg) {
  validate(cfg);
  if (cfg.backend == BackendKind::builtin_nb) return std::make_unique<NaiveBayesTrainer>(cfg.alpha);
  return std::make_unique<ExternalTrainer>(cfg);
}

std::unique_ptr<Model> train(Trainer& trainer, const Dataset& d) {
  if (d.empty()) throw ConfigError("cannot train on an empty dataset");
  return trainer.train(d);
}

PredictionSet predict(const Model& m, const Dataset& d) {
  auto preds = m.predict(d);
  if (preds.size() != d.size()) {
    throw InvariantError("model returned " + std::to_string(preds.size()) + " predictions for " +
                         std::to_string(d.size()) + " examples");
  }
  return preds;
}

bool is_correct(const Prediction& p, const Example& gold, const TaskSpec& spec) {
  if (const auto* y = gold.label()) return p.value == *y;
  const auto& answer = std::get<ContextQA>(gold.payload).answer;
  return metrics::exact_match(p.value, answer) == 1 || metrics::token_f1(p.value, answer) >= spec.qa_f1_threshold;
}

MisclassifiedSet misclassified(const PredictionSet& preds, const Dataset& gold, const TaskSpec& spec) {
  if (preds.size() != gold.size()) {
    throw ConfigError("misclassified: " + std::to_string(preds.size()) + " predictions for " +
                      std::to_string(gold.size()) + " gold examples");
  }
  MisclassifiedSet out;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (is_correct(preds.predictions[i], gold[i], spec)) continue;
    out.errors.push_back({gold[i], preds.predictions[i].value, gold[i].id});
  }
  return out;
}

Dataset to_dataset(const MisclassifiedSet& mis, std::shared_ptr<const TaskSpec> task) {
  std::vector<Example> examples;
  examples.reserve(mis.size());
  for (const auto& e : mis.errors) examples.push_back(e.gold);
  return Dataset(std::move(task), std::move(examples));
}

}  // namespace s3::trainer
