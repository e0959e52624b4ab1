#include "tacopt/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <thread>

#include "tacopt/admm.hpp"
#include "tacopt/checks.hpp"
#include "tacopt/report_io.hpp"
#include "tacopt/scenario.hpp"
#include "tacopt/types.hpp"

namespace tacopt {

namespace {

const std::vector<std::string> kManipModes = {"none", "directional", "determinant",
                                              "tracking"};

void require_mode(const std::string& mode) {
  if (std::find(kManipModes.begin(), kManipModes.end(), mode) == kManipModes.end())
    throw ValidationError("mode", "unknown manipulability mode '" + mode + "'");
}

void require_format(const std::string& format) {
  if (format != "table" && format != "plot" && format != "both")
    throw ValidationError("format", "format must be table, plot or both, got '" +
                                        format + "'");
}

std::string line_f(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

void print_solve_summary(std::ostream& out, const SolveReport& report) {
  out << line_f("  converged            %s (outer iterations: %d)\n",
                report.converged ? "yes" : "no", report.outer_iterations);
  out << line_f("  residuals            primal %.3e, dual %.3e\n",
                report.primal_residual, report.dual_residual);
  out << line_f("  task cost            %.6g\n", report.task_cost);
  out << line_f("  range box            consensus feasible: %s, nominal violation %.3e\n",
                report.grip_box_feasible_consensus ? "yes" : "no",
                report.grip_box_violation_nominal);
  out << line_f("  control bounds       within: %s, violation %.3e\n",
                report.controls_within_bounds ? "yes" : "no", report.control_violation);
  if (report.manip) {
    out << line_f("  manipulability       index %.4g", report.manip->index);
    if (report.manip->has_direction)
      out << line_f(", transmission %.4g", report.manip->transmission);
    out << line_f(", impact proxy %.4g%s\n", report.manip->impact_proxy,
                  report.manip->proxy_used_bare_chain ? " (bare chain)" : "");
  }
  out << line_f("  solve time           %.3f s\n", report.solve_seconds);
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  size_t pos = 0;
  auto parse_one = [](const std::string& token) {
    size_t used = 0;
    unsigned long long value = 0;
    try {
      value = std::stoull(token, &used);
    } catch (const std::exception&) {
      throw ParseError("seeds", "invalid seed '" + token + "'");
    }
    if (used != token.size()) throw ParseError("seeds", "invalid seed '" + token + "'");
    return static_cast<std::uint64_t>(value);
  };
  while (pos <= text.size()) {
    const size_t comma = std::min(text.find(',', pos), text.size());
    const std::string token = text.substr(pos, comma - pos);
    if (token.empty()) throw ParseError("seeds", "empty entry in seed list");
    const size_t range = token.find("..");
    if (range == std::string::npos) {
      seeds.push_back(parse_one(token));
    } else {
      const std::uint64_t lo = parse_one(token.substr(0, range));
      const std::uint64_t hi = parse_one(token.substr(range + 2));
      if (hi < lo)
        throw ParseError("seeds", "descending seed range '" + token + "'");
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    }
    pos = comma + 1;
    if (comma == text.size()) break;
  }
  if (seeds.empty()) throw ParseError("seeds", "empty seed list");
  return seeds;
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  require_format(options.format);
  Scenario scenario = resolve_scenario(options.scenario);
  if (options.mode) {
    require_mode(*options.mode);
    scenario.manip_mode = *options.mode;
  }
  if (options.seed) {
    if (!scenario.randomize)
      throw ValidationError("seed", "scenario '" + scenario.name +
                                        "' has no randomize block; --seed needs one");
    scenario = randomize_targets(scenario, *options.seed);
  }

  std::string out_dir = options.out_dir;
  if (out_dir.empty()) {
    out_dir = "runs/" + scenario.name;
    if (options.seed) out_dir += "-seed" + std::to_string(*options.seed);
  }
  std::filesystem::create_directories(out_dir);

  out << "solving '" << scenario.name << "' (mode " << scenario.manip_mode << ", "
      << scenario.horizon << " steps)\n";
  const SolveReport report = solve(to_problem(scenario));
  print_solve_summary(out, report);

  const auto path = [&out_dir](const char* name) { return out_dir + "/" + name; };
  write_file_atomic(path("scenario.json"), serialize_scenario(scenario));
  const bool tables = options.format != "plot";
  const bool plots = options.format != "table";
  if (tables) {
    write_file_atomic(path("trajectory.csv"), trajectory_csv(report.trajectory));
    write_file_atomic(path("history.csv"), history_csv(report));
    write_file_atomic(path("residuals.csv"), residuals_csv(report));
    write_file_atomic(path("report.csv"), report_csv(scenario, report));
  }
  if (plots) write_file_atomic(path("plot.svg"), scene_svg(scenario, report));
  out << "  outputs in           " << out_dir << "/\n";
  if (!report.converged)
    err << "warning: consensus residuals above tolerance after "
        << report.outer_iterations << " iterations\n";
  return 0;
}

int cmd_compare(const CompareOptions& options, std::ostream& out, std::ostream& err) {
  require_format(options.format);
  const Scenario base = resolve_scenario(options.scenario);
  if (!base.randomize)
    throw ValidationError("scenario", "scenario '" + base.name +
                                          "' has no randomize block; compare needs "
                                          "seeded placements");
  std::vector<std::string> modes =
      options.modes.empty() ? std::vector<std::string>{"none", "directional"}
                            : options.modes;
  for (const std::string& mode : modes) require_mode(mode);
  std::vector<std::uint64_t> seeds = options.seeds;
  if (seeds.empty())
    for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(s);

  struct Job {
    std::string mode;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const std::string& mode : modes)
    for (std::uint64_t seed : seeds) jobs.push_back({mode, seed});
  std::vector<CompareCell> cells(jobs.size());

  const auto t_start = std::chrono::steady_clock::now();
  std::atomic<size_t> cursor{0};
  std::mutex error_mutex;
  std::string first_error;
  auto worker = [&]() {
    for (size_t i = cursor.fetch_add(1); i < jobs.size(); i = cursor.fetch_add(1)) {
      try {
        Scenario scenario = randomize_targets(base, jobs[i].seed);
        scenario.manip_mode = jobs[i].mode;
        const SolveReport report = solve(to_problem(scenario));
        CompareCell& cell = cells[i];
        cell.mode = jobs[i].mode;
        cell.seed = jobs[i].seed;
        cell.transmission = report.manip ? report.manip->transmission : 0.0;
        cell.manip_index = report.manip ? report.manip->index : 0.0;
        cell.task_cost = report.task_cost;
        cell.outer_iterations = report.outer_iterations;
        cell.converged = report.converged;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty())
          first_error = "mode " + jobs[i].mode + ", seed " +
                        std::to_string(jobs[i].seed) + ": " + e.what();
      }
    }
  };

  size_t thread_count = options.max_threads > 0
                            ? static_cast<size_t>(options.max_threads)
                            : std::max(1u, std::thread::hardware_concurrency());
  thread_count = std::min(thread_count, jobs.size());
  out << "comparing modes {";
  for (size_t i = 0; i < modes.size(); ++i) out << (i ? ", " : "") << modes[i];
  out << "} over " << seeds.size() << " seeds (" << thread_count << " thread"
      << (thread_count == 1 ? "" : "s") << ")\n";
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t i = 0; i < thread_count; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (!first_error.empty()) {
    err << "error: " << first_error << "\n";
    return 1;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  std::string out_dir = options.out_dir;
  if (out_dir.empty()) out_dir = "runs/" + base.name + "-compare";
  std::filesystem::create_directories(out_dir);
  if (options.format != "plot")
    write_file_atomic(out_dir + "/compare.csv", compare_csv(cells));
  if (options.format != "table")
    write_file_atomic(out_dir + "/compare.svg", compare_svg(cells));

  out << compare_text_table(cells);
  out << line_f("total time %.3f s\n", elapsed);
  out << "  outputs in           " << out_dir << "/\n";
  return 0;
}

std::vector<std::string> check_suite_names() {
  return {"gradients", "lqr", "projections", "geometry", "linearization"};
}

int cmd_check(const CheckOptions& options, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> all = check_suite_names();
  std::vector<std::string> suites = options.suites.empty() ? all : options.suites;
  for (const std::string& suite : suites)
    if (std::find(all.begin(), all.end(), suite) == all.end())
      throw ValidationError("suite", "unknown check suite '" + suite + "'");

  bool all_pass = true;
  for (const std::string& suite : suites) {
    CheckResult result;
    if (suite == "gradients") result = check_gradients(options.seed);
    else if (suite == "lqr") result = check_batch_lqr(options.seed);
    else if (suite == "projections") result = check_projections(options.seed);
    else if (suite == "geometry") result = check_geometry(options.seed);
    else result = check_linearization(options.seed);
    out << (result.pass ? "[PASS] " : "[FAIL] ") << result.name
        << line_f("  max_error=%.3e", result.max_error);
    if (!result.detail.empty()) out << "  (" << result.detail << ")";
    out << "\n";
    all_pass = all_pass && result.pass;
  }
  if (!all_pass) err << "one or more check suites failed\n";
  return all_pass ? 0 : 1;
}

int cmd_presets(std::ostream& out) {
  out << line_f("%-16s %-14s %8s %8s %6s %-12s %s\n", "name", "chain", "horizon", "dt",
                "grasp", "manip_mode", "randomize");
  for (const std::string& name : preset_names()) {
    const Scenario scenario = make_preset(name);
    out << line_f("%-16s %-14s %8d %8.3g %6d %-12s %s\n", scenario.name.c_str(),
                  scenario.chain_preset.c_str(), scenario.horizon, scenario.dt,
                  scenario.grasp_step, scenario.manip_mode.c_str(),
                  scenario.randomize ? "yes" : "no");
  }
  return 0;
}

}  // namespace tacopt
