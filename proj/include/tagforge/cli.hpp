#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tagforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitGeneration = 2;

/// Runs the `tagforge` command line. `args` excludes the program name.
/// Subcommands: generate, calibrate, estimate, compare, preview, gamma-variant.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tagforge
