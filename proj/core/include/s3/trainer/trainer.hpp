#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s3/core/dataset.hpp"

namespace s3::trainer {

enum class BackendKind { builtin_nb, external };

struct TrainerConfig {
  BackendKind backend = BackendKind::builtin_nb;
  /// Laplace smoothing for the builtin model.
  double alpha = 1.0;
  /// Shell command that launches an external trainer.
  std::string external_cmd;
  /// Forwarded verbatim to the external trainer's train command.
  nlohmann::json hyperparameters = nlohmann::json::object();
  /// Above this many examples the dataset is passed by file path instead of inline.
  std::size_t inline_limit = 5000;
};

void validate(const TrainerConfig& cfg);
TrainerConfig trainer_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const TrainerConfig& cfg);

struct Prediction {
  std::string value;  ///< a label, or answer text for QA
  std::optional<double> score;
};

/// One prediction per input example, in input order.
struct PredictionSet {
  std::vector<Prediction> predictions;

  std::size_t size() const noexcept { return predictions.size(); }
  bool empty() const noexcept { return predictions.empty(); }
  std::vector<std::string> values() const;
};

/// An immutable trained model.
class Model {
 public:
  virtual ~Model() = default;
  virtual PredictionSet predict(const Dataset& d) const = 0;
  virtual TaskKind kind() const = 0;
};

/// Produces freshly initialized models; every train() call starts from scratch.
class Trainer {
 public:
  virtual ~Trainer() = default;
  virtual std::unique_ptr<Model> train(const Dataset& d) = 0;
  virtual std::string name() const = 0;
};

std::unique_ptr<Trainer> make_trainer(const TrainerConfig& cfg);

/// Checks preconditions (non-empty data) before delegating.
std::unique_ptr<Model> train(Trainer& trainer, const Dataset& d);
PredictionSet predict(const Model& m, const Dataset& d);

/// A gold validation example the model got wrong.
struct MisclassifiedExample {
  Example gold;
  std::string prediction;
  std::string error_id;
};

struct MisclassifiedSet {
  std::vector<MisclassifiedExample> errors;

  std::size_t size() const noexcept { return errors.size(); }
  bool empty() const noexcept { return errors.empty(); }
};

/// Classification: label mismatch. QA: EM = 0 and token F1 below the task threshold.
bool is_correct(const Prediction& p, const Example& gold, const TaskSpec& spec);

MisclassifiedSet misclassified(const PredictionSet& preds, const Dataset& gold, const TaskSpec& spec);

/// The errors as a dataset of their gold examples (ids and provenance preserved).
Dataset to_dataset(const MisclassifiedSet& mis, std::shared_ptr<const TaskSpec> task);

}  // namespace s3::trainer
