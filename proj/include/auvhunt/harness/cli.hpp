#pragma once

#include <exception>
#include <ostream>
#include <string>
#include <vector>

namespace auvhunt::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitIntegrity = 3;

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

/// The command-line tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace auvhunt::harness
