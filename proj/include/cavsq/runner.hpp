#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cavsq/errors.hpp"

namespace cavsq::cli {

enum class Command { Evolve, Spectrum, Feasibility, Validate, Sweep };

std::string to_string(Command c);
Command parse_command(const std::string& name);

enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kConfigurationError = 2, kNumericalFailure = 3 };

/// Malformed or inconsistent configuration.
class ConfigError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

enum class OutputFormat { Csv, Json };

/// Parsed configuration document.
///
/// Top-level keys: "parameters" (object), "output_format" ("csv" | "json"), "output_dir".
/// Numeric parameters must end in a unit suffix:
///   _hz (ordinary frequency, converted to rad/s), _s, _k, _tpi (multiples of T_pi),
///   _ratio (dimensionless), _count (integer).
struct RunConfig {
  Command command = Command::Evolve;
  nlohmann::json parameters = nlohmann::json::object();
  OutputFormat format = OutputFormat::Csv;
  std::filesystem::path output_dir = "output";
  nlohmann::json source;  // config document as read
};

RunConfig parse_config(Command command, const nlohmann::json& doc);
RunConfig load_config(Command command, const std::filesystem::path& path);

struct RunResult {
  int exit_code = kSuccess;
  std::vector<std::filesystem::path> files;
  nlohmann::ordered_json summary;
};

/// Executes a parsed configuration and writes its files (plus `<command>.manifest.json`).
/// Throws ConfigError / NumericalError on failure; validation failures are reported in the result.
RunResult run(const RunConfig& config);

/// Full command-line entry point: `cavsq {evolve|spectrum|feasibility|validate|sweep} <config> [--output-dir DIR]`.
int main_entry(int argc, char** argv);

/// Formats a double with 17 significant digits.
std::string format_number(double x);

}  // namespace cavsq::cli
