#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace commentgen {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs argv[0] (PATH lookup) with no shell; captures stdout and stderr.
/// Throws IoError if the process cannot be spawned.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::optional<std::filesystem::path>& cwd = std::nullopt);

/// POSIX-shell-style word splitting (quotes and backslash escapes), no expansion.
std::vector<std::string> split_shell_words(std::string_view line);

}  // namespace commentgen
