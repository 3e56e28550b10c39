#include <iostream>
#include <string>
#include <vector>

#include "cli_commands.hpp"
#include "cli_config.hpp"

namespace {

void print_usage(std::ostream& out) {
  out << "usage: fae <command> [--config FILE] [KEY=VALUE]...\n"
         "commands:\n"
         "  synth     generate labeled synthetic series (series.csv)\n"
         "  train     train a model (model.fae, history.csv)\n"
         "  search    seeded random hyperparameter search (leaderboard.csv)\n"
         "  detect    alpha*sigma online scoring (scores_<id>.csv)\n"
         "  eval      point-wise detection metrics (metrics.csv)\n"
         "  latent    latent-space PCA projections (latent.csv)\n"
         "  zeroshot  leave-out experiment protocol (zeroshot_<k>.csv)\n"
         "  info      print N and parameter count for a model or config\n";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    print_usage(std::cerr);
    return 2;
  }
  const std::string command = argv[1];
  if (command == "--help" || command == "-h" || command == "help") {
    print_usage(std::cout);
    return 0;
  }

  std::string config_path;
  std::vector<std::string> overrides;
  for (int i = 2; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config") {
      if (i + 1 >= argc) {
        std::cerr << "error: config: --config needs a file argument\n";
        return 2;
      }
      config_path = argv[++i];
    } else if (arg.rfind("--config=", 0) == 0) {
      config_path = arg.substr(9);
    } else if (arg.rfind("--", 0) == 0) {
      std::cerr << "error: config: unknown flag '" << arg << "'\n";
      return 2;
    } else {
      overrides.push_back(arg);
    }
  }

  try {
    const faecli::RunConfig config =
        faecli::RunConfig::load(config_path, overrides);
    return faecli::dispatch(command, config);
  } catch (const faecli::CliError& e) {
    std::cerr << "error: " << faecli::family_name(e.exit_code()) << ": "
              << e.what() << std::endl;
    return e.exit_code();
  }
}
