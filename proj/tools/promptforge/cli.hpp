#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace promptforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// Runs one promptforge command line. args[0] is the program name.
/// Returns 0 on success, 1 on a usage error, 2 on a runtime failure.
int parse_and_dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

} // namespace promptforge::cli
