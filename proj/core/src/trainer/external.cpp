#include "s3/trainer/external.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <algorithm>
#include <thread>

#include <spdlog/spdlog.h>

#include "s3/common/error.hpp"

namespace s3::trainer {

struct TrainerProcess::Impl {
  pid_t pid = -1;
  FILE* to_child = nullptr;
  FILE* from_child = nullptr;
  std::thread stderr_reader;
  std::mutex mu;
};

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

TrainerProcess::TrainerProcess(const std::string& command) : impl_(std::make_unique<Impl>()) {
  // A dead trainer must surface as a protocol error, not kill the engine.
  static std::once_flag ignore_sigpipe;
  std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0 || ::pipe2(err_pipe, O_CLOEXEC) != 0) {
    throw BackendError(BackendErrorKind::protocol, "cannot create pipes for external trainer");
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw BackendError(BackendErrorKind::protocol, "fork failed for external trainer");
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  impl_->pid = pid;
  close_fd(in_pipe[0]);
  close_fd(out_pipe[1]);
  close_fd(err_pipe[1]);
  impl_->to_child = ::fdopen(in_pipe[1], "w");
  impl_->from_child = ::fdopen(out_pipe[0], "r");
  const int err_fd = err_pipe[0];
  impl_->stderr_reader = std::thread([err_fd] {
    FILE* f = ::fdopen(err_fd, "r");
    if (!f) return;
    char* line = nullptr;
    std::size_t cap = 0;
    ssize_t n;
    while ((n = ::getline(&line, &cap, f)) > 0) {
      std::string s(line, static_cast<std::size_t>(n));
      if (!s.empty() && s.back() == '\n') s.pop_back();
      spdlog::info("[trainer] {}", s);
    }
    std::free(line);
    std::fclose(f);
  });
}

TrainerProcess::~TrainerProcess() {
  if (impl_->to_child) std::fclose(impl_->to_child);
  if (impl_->pid > 0) {
    int status = 0;
    ::waitpid(impl_->pid, &status, 0);
  }
  if (impl_->stderr_reader.joinable()) impl_->stderr_reader.join();
  if (impl_->from_child) std::fclose(impl_->from_child);
}

nlohmann::json TrainerProcess::request(const nlohmann::json& msg) {
  std::lock_guard lock(impl_->mu);
  const std::string line = msg.dump() + "\n";
  if (!impl_->to_child || std::fwrite(line.data(), 1, line.size(), impl_->to_child) != line.size() ||
      std::fflush(impl_->to_child) != 0) {
    throw BackendError(BackendErrorKind::protocol, "external trainer is not accepting input");
  }
  char* buf = nullptr;
  std::size_t cap = 0;
  const ssize_t n = ::getline(&buf, &cap, impl_->from_child);
  std::string reply = n > 0 ? std::string(buf, static_cast<std::size_t>(n)) : std::string();
  std::free(buf);
  if (n <= 0) throw BackendError(BackendErrorKind::protocol, "external trainer closed its output");
  try {
    return nlohmann::json::parse(reply);
  } catch (const nlohmann::json::parse_error&) {
    throw BackendError(BackendErrorKind::protocol, "external trainer sent a non-JSON line: " + reply.substr(0, 200));
  }
}

// ---------------------------------------------------------------- trainer

struct ExternalTrainer::Session {
  explicit Session(const std::string& cmd) : process(cmd) {}
  TrainerProcess process;
  std::mutex mu;
  std::uint64_t generation = 0;
};

namespace {

nlohmann::json expect_ok(const nlohmann::json& reply, const char* cmd) {
  if (!reply.is_object() || !reply.value("ok", false)) {
    std::string err = reply.is_object() && reply.contains("error") ? reply["error"].dump() : reply.dump();
    throw BackendError(BackendErrorKind::protocol, std::string("external trainer rejected ") + cmd + ": " + err);
  }
  return reply;
}

nlohmann::json records(const Dataset& d) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : d) arr.push_back(nlohmann::json::parse(serialize_example(e)));
  return arr;
}

class ExternalModel final : public Model {
 public:
  ExternalModel(std::shared_ptr<ExternalTrainer::Session> s, std::uint64_t gen, TaskKind kind)
      : session_(std::move(s)), generation_(gen), kind_(kind) {}

  PredictionSet predict(const Dataset& d) const override;
  TaskKind kind() const override { return kind_; }

 private:
  std::shared_ptr<ExternalTrainer::Session> session_;
  std::uint64_t generation_;
  TaskKind kind_;
};

}  // namespace

ExternalTrainer::ExternalTrainer(const TrainerConfig& cfg)
    : session_(std::make_shared<Session>(cfg.external_cmd)), cfg_(cfg) {
  auto hello = expect_ok(session_->process.request({{"cmd", "hello"}, {"protocol_version", kTrainerProtocolVersion}}),
                         "hello");
  if (hello.contains("protocol_version") && hello["protocol_version"] != kTrainerProtocolVersion) {
    throw BackendError(BackendErrorKind::protocol,
                       "external trainer speaks protocol " + hello["protocol_version"].dump() + ", expected " +
                           std::to_string(kTrainerProtocolVersion));
  }
  remote_name_ = hello.value("name", std::string("unnamed"));
  if (hello.contains("kinds") && hello["kinds"].is_array()) {
    for (const auto& k : hello["kinds"]) {
      if (k.is_string()) kinds_.push_back(k.get<std::string>());
    }
  }
}

ExternalTrainer::~ExternalTrainer() {
  try {
    session_->process.request({{"cmd", "shutdown"}});
  } catch (const std::exception& e) {
    spdlog::warn("external trainer shutdown: {}", e.what());
  }
}

std::unique_ptr<Model> ExternalTrainer::train(const Dataset& d) {
  const auto kind = std::string(to_string(d.task().kind));
  if (!kinds_.empty() && std::find(kinds_.begin(), kinds_.end(), kind) == kinds_.end()) {
    throw ConfigError("external trainer '" + remote_name_ + "' does not support " + kind);
  }
  nlohmann::json msg{{"cmd", "train"}, {"config", cfg_.hyperparameters}, {"kind", kind}, {"labels", d.task().labels}};
  std::filesystem::path spill;
  if (d.size() > cfg_.inline_limit) {
    spill = std::filesystem::temp_directory_path() /
            ("s3-train-" + std::to_string(::getpid()) + "-" + std::to_string(session_->generation + 1) + ".jsonl");
    save_dataset(d, spill);
    msg["dataset_path"] = spill.string();
  } else {
    msg["dataset"] = records(d);
  }
  std::lock_guard lock(session_->mu);
  nlohmann::json reply;
  try {
    reply = session_->process.request(msg);
  } catch (...) {
    if (!spill.empty()) std::filesystem::remove(spill);
    throw;
  }
  if (!spill.empty()) std::filesystem::remove(spill);
  expect_ok(reply, "train");
  ++session_->generation;
  return std::make_unique<ExternalModel>(session_, session_->generation, d.task().kind);
}

PredictionSet ExternalModel::predict(const Dataset& d) const {
  if (d.empty()) return {};
  std::lock_guard lock(session_->mu);
  if (session_->generation != generation_) {
    throw ConfigError("external model is stale: the trainer has been retrained since");
  }
  auto reply = expect_ok(session_->process.request({{"cmd", "predict"}, {"examples", records(d)}}), "predict");
  if (!reply.contains("predictions") || !reply["predictions"].is_array()) {
    throw BackendError(BackendErrorKind::protocol, "predict reply lacks a predictions array");
  }
  PredictionSet out;
  for (const auto& p : reply["predictions"]) {
    if (p.is_string()) {
      out.predictions.push_back({p.get<std::string>(), std::nullopt});
    } else if (p.is_object() && p.contains("value") && p["value"].is_string()) {
      Prediction pred{p["value"].get<std::string>(), std::nullopt};
      if (p.contains("score") && p["score"].is_number()) pred.score = p["score"].get<double>();
      out.predictions.push_back(std::move(pred));
    } else {
      throw BackendError(BackendErrorKind::protocol, "malformed prediction entry: " + p.dump());
    }
  }
  if (out.size() != d.size()) {
    throw BackendError(BackendErrorKind::protocol, "external trainer returned " + std::to_string(out.size()) +
                                                       " predictions for " + std::to_string(d.size()) + " examples");
  }
  return out;
}

}  // namespace s3::trainer
