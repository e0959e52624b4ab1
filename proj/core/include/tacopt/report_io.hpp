#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tacopt/admm.hpp"
#include "tacopt/scenario.hpp"

namespace tacopt {

// Shortest text that parses back to the exact double (17 significant digits).
std::string format_sig17(double v);

// Write-to-temp-then-rename so readers never observe partial files.
void write_file_atomic(const std::string& path, const std::string& content);

// CSV with header t, q_0.., p_x, p_y[, p_z], u_0..; one row per timestep
// (T + 1 rows; the final row has no control and carries zeros there).
std::string trajectory_csv(const Trajectory& traj);

std::string history_csv(const SolveReport& report);    // inner-iteration costs
std::string residuals_csv(const SolveReport& report);  // per-outer residuals
std::string report_csv(const Scenario& scenario, const SolveReport& report);

// Workspace rendering: arm snapshots at t = 0, grasp and T, the gripper path,
// the grasp-range box, targets. 3D scenes show top and side projections.
std::string scene_svg(const Scenario& scenario, const SolveReport& report);

struct CompareCell {
  std::string mode;
  std::uint64_t seed = 0;
  double transmission = 0.0;  // velocity transmission along the probe direction
  double manip_index = 0.0;
  double task_cost = 0.0;
  int outer_iterations = 0;
  bool converged = false;
};

std::string compare_csv(const std::vector<CompareCell>& cells);
std::string compare_svg(const std::vector<CompareCell>& cells);
std::string compare_text_table(const std::vector<CompareCell>& cells);

double median(std::vector<double> values);

}  // namespace tacopt
