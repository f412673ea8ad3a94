#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace latfield::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitPropertyFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Runs the command line (program name excluded) and returns the exit code.
/// Results go to `out`; structured error JSON goes to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace latfield::cli
