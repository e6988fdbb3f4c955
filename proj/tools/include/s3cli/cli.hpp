#pragma once

#include <string>
#include <vector>

#include "s3/common/error.hpp"

namespace s3::cli {

/// 0 success; 2 configuration; 3 backend; 4 internal.
int exit_code(ErrorCategory c) noexcept;

/// Parses `args` (without the program name) and runs the selected subcommand.
/// Failures print one `error:<category>: <message>` line to stderr.
int run_pipeline(const std::vector<std::string>& args);

}  // namespace s3::cli
