#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wavecqr::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNotConverged = 3 };

/// Runs the command line `args` (without the program name). Normal output
/// goes to `out`; errors and warnings go to `err` as lines of the form
///   wavecqr: error[usage|data|solver]: message
///   wavecqr: warning[convergence]: message
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace wavecqr::cli
