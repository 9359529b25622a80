#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lightguide {

/// Exit codes of the command-line driver.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUnmet = 1;  ///< simulate: at least one constraint not met
inline constexpr int kExitError = 2;

/// Entry point of the `lightguide` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lightguide
