#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tacopt/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"constrained trajectory optimization for tool-wielding manipulators"};
  app.require_subcommand(1);

  tacopt::RunOptions run_options;
  CLI::App* run = app.add_subcommand("run", "solve one scenario, write tables and plots");
  run->add_option("--scenario", run_options.scenario, "preset name or scenario file")
      ->required();
  run->add_option("--out", run_options.out_dir, "output directory");
  run->add_option("--seed", run_options.seed,
                  "randomize task placements with this seed");
  run->add_option("--mode", run_options.mode,
                  "override the manipulability mode (none, directional, determinant, "
                  "tracking)");
  run->add_option("--format", run_options.format, "table, plot or both")
      ->capture_default_str();

  tacopt::CompareOptions compare_options;
  std::string seeds_text;
  CLI::App* compare = app.add_subcommand(
      "compare", "solve a randomized scenario across modes and seeds");
  compare->add_option("--scenario", compare_options.scenario,
                      "preset name or scenario file")
      ->required();
  compare->add_option("--out", compare_options.out_dir, "output directory");
  compare->add_option("--mode", compare_options.modes,
                      "manipulability mode, repeatable (default: none, directional)");
  compare->add_option("--seeds", seeds_text, "seed list, e.g. 0..9 or 0,2,5")
      ->capture_default_str();
  compare->add_option("--format", compare_options.format, "table, plot or both")
      ->capture_default_str();
  compare->add_option("--max-threads", compare_options.max_threads,
                      "worker threads (0 = hardware concurrency)")
      ->capture_default_str();

  tacopt::CheckOptions check_options;
  CLI::App* check =
      app.add_subcommand("check", "run the numerical verification suites");
  check->add_option("--suite", check_options.suites,
                    "suite name, repeatable (default: all)");
  check->add_option("--seed", check_options.seed, "base seed for the random probes")
      ->capture_default_str();

  CLI::App* presets = app.add_subcommand("presets", "list the built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return tacopt::cmd_run(run_options, std::cout, std::cerr);
    if (compare->parsed()) {
      if (!seeds_text.empty())
        compare_options.seeds = tacopt::parse_seed_list(seeds_text);
      return tacopt::cmd_compare(compare_options, std::cout, std::cerr);
    }
    if (check->parsed()) return tacopt::cmd_check(check_options, std::cout, std::cerr);
    if (presets->parsed()) return tacopt::cmd_presets(std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
