#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

namespace mvskit::cli {

// Extra key/value pairs a command resolves while running (bandwidths, counts),
// appended to run.txt after the echoed options.
using RunLog = std::vector<std::pair<std::string, std::string>>;

struct Command {
  CLI::App* app = nullptr;
  std::shared_ptr<std::string> out_dir;
  std::function<void(RunLog&)> exec;
};

std::vector<Command> register_commands(CLI::App& root);

}  // namespace mvskit::cli
