#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hwml::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,       // usage, parse or configuration error
  kExitInfeasible = 2,  // optimisation found no feasible point
  kExitNumerical = 3,
};

// Runs one command line (without the program name). Reports go to `out`,
// diagnostics to `err`; files are written under --output-dir.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hwml::cli
