#ifndef MUJET_CLI_HPP
#define MUJET_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace mujet::cli {

enum ExitCode : int { Ok = 0, Fail = 1, InputError = 2, Degenerate = 3 };

/// Runs the command line (argv[0] is the program name). Reports go to `out`,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mujet::cli

#endif
