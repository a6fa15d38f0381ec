#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace waveguide::cli {

/// Parses `args` (without the program name), runs the command and returns
/// the process exit code: 0 success, 2 configuration error, 3 solver
/// failure, 4 validation failure. Data goes to `out` unless --out names a
/// file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace waveguide::cli
