#pragma once

#include <string>
#include <vector>

namespace tvme::cli {

// Exit status: 0 success, 1 data or numerical failure, 2 usage error.
int run(int argc, const char* const* argv);

// Same, for tests: args exclude the program name.
int run(const std::vector<std::string>& args);

}  // namespace tvme::cli
