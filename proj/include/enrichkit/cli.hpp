#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace enrichkit {

// Process exit codes shared by every subcommand.
inline constexpr int exit_ok = 0;
inline constexpr int exit_fatal = 1;
inline constexpr int exit_partial = 2;
inline constexpr int exit_usage = 64;

/// Parses and runs one invocation. `args` excludes the program name;
/// `in` backs stdin-consuming commands. Never throws: every outcome maps
/// onto one of the exit codes above.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

} // namespace enrichkit
