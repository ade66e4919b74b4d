#pragma once

#include <iosfwd>

namespace forestjudge {

// Entry point of the forestjudge command-line tool. Writes results to `out`
// and diagnostics to `err`; returns the process exit code (0 on success, 1 on
// a library error, 2 on a usage error).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace forestjudge
