#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace causalpsm::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2 };

/// Runs one subcommand. Help and usage text go to `out` and `err`
/// respectively; artifacts are written to the paths named by the flags.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace causalpsm::cli
