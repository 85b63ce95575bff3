#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace textlime {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitConfigError = 2;

// Entry point of the `textlime` command. `args` excludes the program name.
// Precedence of settings: command-line flags, then the --config file, then
// TEXTLIME_* environment variables, then built-in defaults.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace textlime
