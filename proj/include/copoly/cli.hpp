#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace copoly {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // computational failure
inline constexpr int kExitUsage = 2;    // usage or config error

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "COPOLY_OUT_DIR";

/// Parses `args` (without the program name) and runs the chosen command.
/// A `--config file.json` argument supplies option values; explicit flags
/// override it and unknown keys are rejected. Errors go to `err` as a
/// one-line JSON object.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace copoly
