#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tacopt/admm.hpp"
#include "tacopt/chain.hpp"
#include "tacopt/types.hpp"

namespace tacopt {

// Reachability-aware randomization of the task placement. Draws are uniform
// (box center, box yaw, final target, in that order) and rejected until the
// placements sit inside the arm's reachable annulus.
// Placements are sampled as a rigid rotation of the whole scene about the
// base z-axis plus bounded perturbations, so every draw keeps the tuned
// relative geometry between start posture, handle range, and target.
struct RandomizeSpec {
  double scene_angle_low = 0.0, scene_angle_high = 0.0;  // rigid scene rotation (rad)
  double box_slide_low = 0.0, box_slide_high = 0.0;      // handle range slide along its axis (m)
  double target_radius_low = 0.0, target_radius_high = 0.0;  // final target distance (m)
  double target_angle_jitter = 0.0;  // extra target rotation about the base z-axis (rad)
  double min_base_distance = 0.3;
  double reach_margin = 0.1;
  double min_separation = 0.0;  // between tool head and final target
};

// Everything needed to pose one solve: the arm, the horizon, the grasp-range
// box, the tool, targets, weights, and solver settings. Serializable to JSON
// with unit-suffixed keys; unknown keys are rejected on load.
struct Scenario {
  std::string name;
  std::string chain_preset = "planar3";   // planar3 | spatial7 | custom-planar
  std::vector<double> link_lengths;       // custom-planar only
  int horizon = 100;
  double dt = 0.01;
  int grasp_step = 50;
  Vec q0;
  Vec u_lower, u_upper;

  std::optional<OrientedBox> grip_box;
  std::optional<ToolSpec> tool;

  std::optional<Vec> final_position;
  std::optional<Vec> hit_direction;     // target direction of the pointing axis
  std::optional<Vec> handle_axis;       // grasp-perpendicularity reference
  std::optional<Vec> manip_direction;   // transmission direction (diagnostics too)
  std::optional<Vec> ellipsoid_direction;
  double ellipsoid_major = 1.0, ellipsoid_minor = 1.0;

  double w_position = 0.0;
  double w_orientation = 0.0;
  double w_direction = 0.0;
  double w_manip = 0.0;
  double w_joint_limit = 1.0;
  double w_control = 1e-5;

  std::string manip_mode = "none";  // none | directional | determinant | tracking

  SolverParams solver;

  std::optional<RandomizeSpec> randomize;
};

KinematicChain make_chain(const Scenario& scenario);

// Scenario -> solver problem (builds the cost terms for the active mode).
Problem to_problem(const Scenario& scenario);

// Strict parser: every unknown key is a ParseError naming the offending field;
// out-of-domain values are ValidationErrors naming the field.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

// Canonical serialization (fixed key order, 17 significant digits). A parse of
// the output reproduces the scenario exactly.
std::string serialize_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::string& path);

bool operator==(const Scenario& a, const Scenario& b);

// Deterministic placement randomization; throws ValidationError when no valid
// placement is found in 1000 attempts. No-op fields stay untouched.
Scenario randomize_targets(const Scenario& scenario, std::uint64_t seed);

std::vector<std::string> preset_names();
Scenario make_preset(const std::string& name);

// Resolve a --scenario argument: an existing file path is loaded, otherwise
// the name is looked up among presets.
Scenario resolve_scenario(const std::string& path_or_name);

}  // namespace tacopt
