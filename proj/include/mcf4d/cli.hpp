#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcf4d {

/// Exit codes: 0 success, 2 invalid input or configuration, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPrecondition = 2;
inline constexpr int kExitNumerical = 3;

/// args excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, char** argv);

}  // namespace mcf4d
