#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpsense/error.hpp"

namespace cpsense::cli {

/// Process exit codes.
enum Exit : int {
  kOk = 0,
  kFailure = 1,    // replay verification mismatch, unexpected errors
  kConfig = 2,
  kIo = 3,
  kShape = 4,
  kCoverage = 5,
};

int exit_code_for(ErrorCode code) noexcept;

inline constexpr const char* kVersion = "0.1.0";

/// Entry point shared by the executable and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct OutputFile {
  std::filesystem::path path;
  bool deterministic = true;
};

/// Executes a command from its fully resolved configuration (as stored in a
/// manifest) and writes the manifest next to the outputs.
std::vector<OutputFile> execute(const std::string& command, const nlohmann::json& config,
                                std::ostream& out, std::ostream& err);

}  // namespace cpsense::cli
