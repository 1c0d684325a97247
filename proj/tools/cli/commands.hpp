#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace occtune::cli {

// Environment variable naming an architecture config file loaded on top of
// the built-ins (overridden by --arch-db).
inline constexpr const char* kArchDbEnv = "OCCTUNE_ARCH_DB";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitWarning = 2;  // completed, but a fallback was taken

// Entry point shared by main() and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace occtune::cli
