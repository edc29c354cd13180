#pragma once

// The xqd command line as a library, so tests can drive it in-process.

#include <iosfwd>
#include <string>
#include <vector>

namespace xqd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// args excludes the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xqd::cli
