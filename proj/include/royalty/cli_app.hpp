#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace royalty {

// Exit codes: 0 success, 1 verification failure (equilibrium deviations,
// replay mismatch), 2 usage or configuration errors.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitUsage = 2;

// Runs the royalty-sim command line. `args` excludes the program name.
// Streams are injectable for tests; main() passes std::cout/std::cerr.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace royalty
