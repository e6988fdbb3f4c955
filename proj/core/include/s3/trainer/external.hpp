#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s3/trainer/trainer.hpp"

namespace s3::trainer {

inline constexpr int kTrainerProtocolVersion = 1;

/// A child process speaking JSON lines on stdin/stdout. Stderr lines are logged
/// verbatim. Requests are strictly serialized.
class TrainerProcess {
 public:
  explicit TrainerProcess(const std::string& command);
  ~TrainerProcess();

  TrainerProcess(const TrainerProcess&) = delete;
  TrainerProcess& operator=(const TrainerProcess&) = delete;

  /// Send one request and wait for one response line.
  nlohmann::json request(const nlohmann::json& msg);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Trainer backed by an external process implementing the hello/train/predict/shutdown
/// protocol. Only the most recently trained model can predict.
class ExternalTrainer final : public Trainer {
 public:
  explicit ExternalTrainer(const TrainerConfig& cfg);
  ~ExternalTrainer() override;

  std::unique_ptr<Model> train(const Dataset& d) override;
  std::string name() const override { return "external:" + remote_name_; }

  const std::vector<std::string>& supported_kinds() const noexcept { return kinds_; }

  /// Process plus retrain counter shared with the models it produced.
  struct Session;

 private:
  std::shared_ptr<Session> session_;
  TrainerConfig cfg_;
  std::string remote_name_;
  std::vector<std::string> kinds_;
};

}  // namespace s3::trainer
