#pragma once

#include "qhgeo/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace qhgeo::cli {

enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kConfigError = 2,
  kNotConverged = 3,
};

struct Outcome {
  int exit_code = kOk;
  std::vector<std::filesystem::path> files;  // in the order written
  std::vector<std::string> messages;         // human-readable summary lines
};

std::vector<std::string> command_names();  // moduli, geodesic, trace, verify
std::vector<std::string> suite_names();

/// Runs one command on a parsed config.  Outputs go to
/// <output_dir>/<scenario>/.  For `verify`, an empty suite falls back to
/// the operation name.  Throws ConfigError for invalid parameters.
Outcome run(const std::string& command, const RunConfig& config, const std::string& suite = "");

/// Full command line: qhgeo <command> --config FILE [--seed N] [--out DIR]
/// [--suite S].  Returns the process exit code.
int main(int argc, char** argv);

}  // namespace qhgeo::cli
