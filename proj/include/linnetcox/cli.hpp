#pragma once

#include <string>
#include <vector>

namespace linnet {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one command line (args excludes the program name). Returns 0 on
/// success, 2 on invalid input, 3 on numerical failure.
int run_command(const std::vector<std::string>& args);

} // namespace linnet
