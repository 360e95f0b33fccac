#pragma once

#include <string>
#include <vector>

namespace melm {

/// Runs the command-line tool. Returns the process exit code: 0 on success,
/// 2 on usage errors (message on stderr), 1 on runtime failures (message
/// names the failing stage).
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace melm
