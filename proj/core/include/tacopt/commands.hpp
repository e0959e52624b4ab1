#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tacopt {

// CLI entry points, kept in the library so tests can drive them directly.
// Each returns a process exit code and writes human-readable progress to
// `out` / diagnostics to `err`. File outputs carry full 17-digit precision
// and no timing, so repeated runs are byte-identical.

struct RunOptions {
  std::string scenario;              // preset name or path to a scenario file
  std::string out_dir;               // default: runs/<name>[-seed<k>]
  std::optional<std::uint64_t> seed; // randomizes placements when supported
  std::optional<std::string> mode;   // overrides the manipulability mode
  std::string format = "both";       // table | plot | both
};

struct CompareOptions {
  std::string scenario;
  std::string out_dir;               // default: runs/<name>-compare
  std::vector<std::string> modes;    // default: none, directional
  std::vector<std::uint64_t> seeds;  // default: 0..9
  std::string format = "both";
  int max_threads = 0;               // 0 = hardware concurrency
};

struct CheckOptions {
  std::vector<std::string> suites;  // subset of check_suite_names(); empty = all
  std::uint64_t seed = 1234;
};

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareOptions& options, std::ostream& out, std::ostream& err);
int cmd_check(const CheckOptions& options, std::ostream& out, std::ostream& err);
int cmd_presets(std::ostream& out);

std::vector<std::string> check_suite_names();

// "0,3,7" and "0..9" (inclusive) and mixtures of both.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace tacopt
