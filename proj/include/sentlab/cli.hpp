#pragma once

#include <string>
#include <vector>

namespace sentlab::cli {

// Dispatches one subcommand. Exit codes: 0 success, 1 usage error,
// 2 data/model error.
int run(const std::vector<std::string>& args);

}  // namespace sentlab::cli
