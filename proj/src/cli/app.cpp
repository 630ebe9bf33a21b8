#include <filesystem>
#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "mvskit/cli.hpp"
#include "mvskit/error.hpp"
#include "mvskit/parallel.hpp"

namespace mvskit::cli {

namespace {

void write_run_file(const Command& cmd, int threads, const RunLog& log) {
  std::ofstream os(std::filesystem::path(*cmd.out_dir) / "run.txt");
  if (!os) throw Error("cannot write run.txt in " + *cmd.out_dir);
  os << "command=" << cmd.app->get_name() << "\nthreads=" << threads << '\n';
  os << cmd.app->config_to_str(true, false);
  for (const auto& [k, v] : log) os << "resolved." << k << '=' << v << '\n';
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Multi-view stereo toolkit: synthetic scenes, plane sweep, losses, style transfer, fusion and evaluation"};
  app.name("mvskit");
  app.require_subcommand(1, 1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (default: MVSKIT_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  auto commands = register_commands(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  init_threads_from_env();
  if (threads > 0) set_max_threads(threads);

  for (const auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    try {
      std::filesystem::create_directories(*cmd.out_dir);
      RunLog log;
      cmd.exec(log);
      write_run_file(cmd, max_threads(), log);
      return kExitOk;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitData;
    }
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"mvskit"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace mvskit::cli
