#pragma once

#include <stdexcept>
#include <string>

namespace s3 {

/// Coarse failure class. The CLI maps these onto exit codes 2, 3 and 4.
enum class ErrorCategory { config, backend, internal };

const char* to_string(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Invalid configuration, malformed input files, violated preconditions.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

/// A record in a line-oriented file could not be read.
class RecordError : public ConfigError {
 public:
  RecordError(std::string path, std::size_t line, const std::string& what)
      : ConfigError(path + ":" + std::to_string(line) + ": " + what),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

enum class BackendErrorKind {
  auth,
  rate_limit,
  timeout,
  http,
  no_rule,
  unparseable,
  budget_exhausted,
  prompt_too_long,
  protocol,
};

const char* to_string(BackendErrorKind k) noexcept;

/// Failures talking to an LLM backend or an external trainer process.
class BackendError : public Error {
 public:
  BackendError(BackendErrorKind kind, const std::string& what)
      : Error(ErrorCategory::backend, what), kind_(kind) {}

  BackendErrorKind kind() const noexcept { return kind_; }

  /// Transient failures are worth another attempt with a fresh sample.
  bool transient() const noexcept {
    return kind_ == BackendErrorKind::rate_limit || kind_ == BackendErrorKind::timeout ||
           kind_ == BackendErrorKind::http;
  }

 private:
  BackendErrorKind kind_;
};

/// An internal consistency check failed; always a bug.
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(ErrorCategory::internal, what) {}
};

}  // namespace s3
