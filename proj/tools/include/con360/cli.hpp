#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace con360::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitValidation = 4;

// Runs the command line `args` (without the program name). Progress lines go
// to `out`; failures are reported on `err` as one JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args);

}  // namespace con360::cli
