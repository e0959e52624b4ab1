#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tacopt/commands.hpp"
#include "tacopt/scenario.hpp"

using namespace tacopt;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("tacopt_test_" + tag);
  fs::remove_all(dir);
  return dir;
}

// A shrunk copy of the viapoint task: same structure, short horizon, so the
// command plumbing is exercised in well under a second per solve.
fs::path write_tiny_scenario() {
  Scenario s = make_preset("fig3a-1");
  s.name = "tiny-viapoint";
  s.horizon = 30;
  s.dt = 0.04;
  s.grasp_step = 15;
  const fs::path path = fs::temp_directory_path() / "tacopt_tiny_viapoint.json";
  save_scenario(s, path.string());
  return path;
}

}  // namespace

TEST_CASE("seed lists parse singles, ranges and mixtures") {
  CHECK(parse_seed_list("4") == std::vector<std::uint64_t>{4});
  CHECK(parse_seed_list("0,3,7") == std::vector<std::uint64_t>{0, 3, 7});
  CHECK(parse_seed_list("2..5") == std::vector<std::uint64_t>{2, 3, 4, 5});
  CHECK(parse_seed_list("1,4..6,9") == std::vector<std::uint64_t>{1, 4, 5, 6, 9});
  CHECK_THROWS_AS(parse_seed_list(""), ParseError);
  CHECK_THROWS_AS(parse_seed_list("3,,4"), ParseError);
  CHECK_THROWS_AS(parse_seed_list("7..2"), ParseError);
  CHECK_THROWS_AS(parse_seed_list("a..b"), ParseError);
}

TEST_CASE("check command runs selected suites") {
  CHECK(check_suite_names() ==
        std::vector<std::string>{"gradients", "lqr", "projections", "geometry", "linearization"});

  std::ostringstream out, err;
  CheckOptions options;
  options.suites = {"lqr", "geometry"};
  CHECK(cmd_check(options, out, err) == 0);
  CHECK(out.str().find("[PASS] batch_lqr") != std::string::npos);
  CHECK(out.str().find("[PASS] geometry") != std::string::npos);
  CHECK(err.str().empty());

  options.suites = {"spelling"};
  CHECK_THROWS_AS(cmd_check(options, out, err), ValidationError);
}

TEST_CASE("presets command prints the catalog") {
  std::ostringstream out;
  CHECK(cmd_presets(out) == 0);
  for (const auto& name : preset_names())
    CHECK(out.str().find(name) != std::string::npos);
}

TEST_CASE("run command writes the full table set") {
  const fs::path scn = write_tiny_scenario();
  const fs::path dir = fresh_dir("run_tables");
  std::ostringstream out, err;
  RunOptions options;
  options.scenario = scn.string();
  options.out_dir = dir.string();
  options.format = "table";
  CHECK(cmd_run(options, out, err) == 0);
  CHECK(out.str().find("tiny-viapoint") != std::string::npos);

  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK(fs::exists(dir / "history.csv"));
  CHECK(fs::exists(dir / "residuals.csv"));
  CHECK(fs::exists(dir / "report.csv"));
  CHECK(fs::exists(dir / "scenario.json"));
  CHECK_FALSE(fs::exists(dir / "plot.svg"));

  const std::string traj = slurp(dir / "trajectory.csv");
  CHECK(traj.rfind("t,q_0,q_1,q_2,p_x,p_y,u_0,u_1,u_2\n", 0) == 0);
  // One header plus T + 1 state rows.
  CHECK(std::count(traj.begin(), traj.end(), '\n') == 32);
  CHECK(slurp(dir / "history.csv").rfind("outer,inner,cost,alpha,no_progress\n", 0) == 0);
  CHECK(slurp(dir / "residuals.csv").rfind("outer,primal,dual\n", 0) == 0);
  const std::string report = slurp(dir / "report.csv");
  CHECK(report.rfind("key,value\n", 0) == 0);
  CHECK(report.find("\nfinal_tip_error,") != std::string::npos);
  CHECK(report.find("\nconverged,") != std::string::npos);
  CHECK(report.find("solve_seconds") == std::string::npos);  // no timing in tables

  // The effective scenario is persisted and parses back to itself.
  const Scenario persisted = parse_scenario(slurp(dir / "scenario.json"));
  CHECK(persisted == resolve_scenario(scn.string()));

  fs::remove_all(dir);
}

TEST_CASE("run command is byte-deterministic") {
  const fs::path scn = write_tiny_scenario();
  const fs::path dir_a = fresh_dir("run_det_a");
  const fs::path dir_b = fresh_dir("run_det_b");
  std::ostringstream sink;
  RunOptions options;
  options.scenario = scn.string();
  options.format = "table";
  options.out_dir = dir_a.string();
  CHECK(cmd_run(options, sink, sink) == 0);
  options.out_dir = dir_b.string();
  CHECK(cmd_run(options, sink, sink) == 0);
  for (const char* name : {"trajectory.csv", "history.csv", "residuals.csv", "report.csv"})
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("run command plot format emits only the scene") {
  const fs::path scn = write_tiny_scenario();
  const fs::path dir = fresh_dir("run_plot");
  std::ostringstream out, err;
  RunOptions options;
  options.scenario = scn.string();
  options.out_dir = dir.string();
  options.format = "plot";
  CHECK(cmd_run(options, out, err) == 0);
  CHECK(fs::exists(dir / "plot.svg"));
  CHECK_FALSE(fs::exists(dir / "trajectory.csv"));
  const std::string svg = slurp(dir / "plot.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("run command rejects bad inputs") {
  std::ostringstream out, err;
  RunOptions options;
  options.scenario = "no-such-scenario";
  CHECK_THROWS_AS(cmd_run(options, out, err), Error);

  options.scenario = "fig3a-1";  // no randomize block in this preset
  options.seed = 5;
  CHECK_THROWS_AS(cmd_run(options, out, err), ValidationError);

  options.seed.reset();
  options.format = "fancy";
  CHECK_THROWS_AS(cmd_run(options, out, err), ValidationError);
  options.format = "table";
  options.mode = "fastest";
  CHECK_THROWS_AS(cmd_run(options, out, err), ValidationError);
}

TEST_CASE("compare command sweeps modes and seeds") {
  Scenario s = make_preset("fig4-pickplace");
  s.name = "tiny-compare";
  s.horizon = 24;
  s.dt = 0.05;
  s.grasp_step = 12;
  const fs::path scn = fs::temp_directory_path() / "tacopt_tiny_compare.json";
  save_scenario(s, scn.string());

  const fs::path dir = fresh_dir("compare");
  std::ostringstream out, err;
  CompareOptions options;
  options.scenario = scn.string();
  options.out_dir = dir.string();
  options.seeds = {0, 1};
  options.max_threads = 2;
  CHECK(cmd_compare(options, out, err) == 0);
  CHECK(out.str().find("median_transmission") != std::string::npos);

  const std::string csv = slurp(dir / "compare.csv");
  CHECK(csv.rfind("mode,seed,transmission,manip_index,task_cost,outer_iterations,converged\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 2 modes x 2 seeds
  CHECK(csv.find("\ndirectional,1,") != std::string::npos);
  CHECK(slurp(dir / "compare.svg").rfind("<svg", 0) == 0);

  // Same sweep, same bytes.
  const fs::path dir_b = fresh_dir("compare_b");
  options.out_dir = dir_b.string();
  CHECK(cmd_compare(options, out, err) == 0);
  CHECK(slurp(dir / "compare.csv") == slurp(dir_b / "compare.csv"));

  CompareOptions no_random;
  no_random.scenario = "fig3a-1";
  CHECK_THROWS_AS(cmd_compare(no_random, out, err), ValidationError);

  fs::remove_all(dir);
  fs::remove_all(dir_b);
}
