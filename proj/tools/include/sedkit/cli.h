#pragma once

// In-process entry point of the `sedkit` command-line tool.

#include <iosfwd>
#include <string>
#include <vector>

namespace sedkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// args[0] is the program name. Reports go to `out`, warnings and errors to
// `err`. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace sedkit::cli
