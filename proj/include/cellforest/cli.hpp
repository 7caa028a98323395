#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cellforest {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Run one subcommand (simulate, corrupt, analyze, metrics, export).
/// `args` excludes the program name. Returns the process exit code.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_dispatch(int argc, const char* const* argv);

}  // namespace cellforest
