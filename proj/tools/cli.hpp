#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdnet::cli {

/// Invalid or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kDataError = 3, kNumericalError = 4 };

struct Options {
  std::string command;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::size_t> window;
  std::vector<std::string> models;
  std::optional<std::string> family;
};

/// Runs one subcommand. Throws ConfigError, DataError or NumericalError;
/// progress lines go to log.
void run_command(const Options& opts, std::ostream& log);

/// Parses argv, runs the command and maps failures to exit codes.
int main(int argc, char** argv);

}  // namespace sdnet::cli
