#pragma once

#include <string>
#include <vector>

namespace mvskit::cli {

// Exit codes: 0 success, 1 usage error, 2 data error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

int run(int argc, const char* const* argv);
// args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace mvskit::cli
