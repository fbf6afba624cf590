#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emtree {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitInternal = 3,
};

// Runs one subcommand. args[0] is the program name. Normal output goes to
// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emtree
