#include <string>
#include <vector>

#include "s3cli/cli.hpp"

int main(int argc, char** argv) {
  return s3::cli::run_pipeline(std::vector<std::string>(argv + 1, argv + argc));
}
