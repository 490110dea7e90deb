#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rwlt {

inline constexpr const char* kToolName = "rwlt";
inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitIdentity = 2,
    kExitStatistical = 3,
    kExitResource = 4,
};

/// Runs one subcommand. `args` excludes the program name. Reports go to the
/// --out file or to `out`; diagnostics go to `err`.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace rwlt
