#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tcfd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitPartial = 2;

/// Runs the command line `args` (without the program name). Returns 0 on
/// success, 1 on a hard failure and 2 when some items failed and were
/// listed in the run's errors.tsv.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace tcfd::cli
