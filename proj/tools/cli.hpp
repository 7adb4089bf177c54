#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cvqkd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitComputation = 1;
inline constexpr int kExitValidation = 2;

/// Runs one subcommand. `args` excludes the program name. Human-readable
/// results go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cvqkd::cli
