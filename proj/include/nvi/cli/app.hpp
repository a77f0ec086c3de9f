#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nvi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime or data failure
inline constexpr int kExitUsage = 2;    // bad usage or configuration

/// Runs one command line (without the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nvi::cli
