#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mz/experiments.hpp"

namespace mz::cli {

enum class Subcommand { ergodicity, truth, tmodel, calibrate, noise_sim, histogram, all };

std::string to_string(Subcommand cmd);

struct CliInvocation {
  Subcommand subcommand = Subcommand::all;
  std::optional<std::filesystem::path> config_path;
  std::filesystem::path out_dir = "results";
  std::optional<std::uint64_t> seed_override;
  std::optional<std::size_t> samples_override;
};

/// Bad command line. `usage` holds the text to show the user.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& what, std::string usage)
      : std::runtime_error(what), usage_(std::move(usage)) {}
  const std::string& usage() const { return usage_; }
  static constexpr int exit_code = 2;

 private:
  std::string usage_;
};

/// Help was requested; carries the text.
class HelpRequested : public std::runtime_error {
 public:
  explicit HelpRequested(const std::string& text) : std::runtime_error(text) {}
};

/// argv excludes the program name.
CliInvocation parse_args(const std::vector<std::string>& args);

/// Config file problem, reported with its line number where there is one.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` format, `#` starts a comment. Absent keys take the
/// built-in defaults; unknown keys are rejected.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Executes an invocation. Progress goes to `log`, the one-line summary to
/// `out`. Returns the process exit code.
int run(const CliInvocation& invocation, std::ostream& out, std::ostream& log);

/// Entry point used by the executable.
int main(int argc, char** argv);

}  // namespace mz::cli
