#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace breps::cli {

// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitEnvironment = 3;

/// Runs the `breps` command line. `args` excludes the program name.
/// Machine-readable output goes to `out`, diagnostics to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace breps::cli
