#ifndef ORDQR_TOOLS_COMMANDS_HPP
#define ORDQR_TOOLS_COMMANDS_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ordqr::cli {

/// Stable process exit codes.
enum ExitCode : int { kOk = 0, kUserError = 2, kNumericalError = 3 };

/// Runs one command line (without the program name). Progress goes to
/// `out`, error messages to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Directory a command writes into: <out>/<command>-<seed>.
std::filesystem::path run_directory(const std::filesystem::path& out, const std::string& command,
                                    unsigned long long seed);

}  // namespace ordqr::cli

#endif  // ORDQR_TOOLS_COMMANDS_HPP
