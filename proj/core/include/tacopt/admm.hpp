#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tacopt/chain.hpp"
#include "tacopt/costs.hpp"
#include "tacopt/manipulability.hpp"
#include "tacopt/ocp.hpp"
#include "tacopt/types.hpp"

namespace tacopt {

// Axis-aligned box in a rotated frame: { c + R y : |y_i| <= half_extents_i }.
struct OrientedBox {
  Vec center;
  Mat rotation;
  Vec half_extents;

  int dim() const { return static_cast<int>(center.size()); }
  bool contains(const Vec& point, double tol = 0.0) const;
  // Signed-ish distance: 0 inside, Euclidean distance to the box otherwise.
  double distance(const Vec& point) const;
};

// Componentwise clip onto [lower, upper].
Vec project_box(const Vec& v, const Vec& lower, const Vec& upper);

// Projection onto the slab { x : l <= a.x <= u } (closed-form, single shift).
Vec project_affine_band(const Vec& x, const Vec& a, double lower, double upper);

// Rotate into the box frame, clip, rotate back.
Vec project_oriented_box(const Vec& point, const OrientedBox& box);

struct AffineBand {
  Vec a;
  double lower = 0.0;
  double upper = 0.0;
};

// Constraints handled by the consensus projection: per-joint velocity bounds
// at every step, and a workspace box on the gripper position at given steps.
struct ConstraintSet {
  Vec u_lower, u_upper;
  std::optional<OrientedBox> grip_box;
  std::vector<int> grip_box_steps;           // timesteps where grip_box applies
  std::vector<AffineBand> extra_bands;       // optional, applied after the box
};

struct ConsensusState {
  Vec z_x, z_u;          // feasible copies of the stacked state / control
  Vec lambda_x, lambda_u;  // scaled duals
};

// Componentwise projection of (hat + lambda) onto the constraint set; entries
// without a constraint pass through unchanged.
ConsensusState z_update(const Vec& x_hat, const Vec& u_hat, const ConsensusState& prev,
                        const ConstraintSet& constraints, int dof, int wdim);

Vec dual_update(const Vec& lambda, const Vec& hat, const Vec& z);

// Squared-norm residuals: primal ||u - z_u||^2 + ||x - z_x||^2, dual
// ||z_x - z_x_prev||^2 + ||z_u - z_u_prev||^2.
std::pair<double, double> residuals(const Vec& x_hat, const Vec& u_hat,
                                    const ConsensusState& current,
                                    const Vec& z_x_prev, const Vec& z_u_prev);

struct SolverParams {
  int max_outer = 20;       // consensus iterations
  int max_inner = 10;       // solver sweeps per consensus iteration
  double c_max = 1.0;       // inner loop exits early below this augmented cost
  double primal_tol = 1e-4;
  double dual_tol = 1e-4;
  double alpha_min = 0.0009765625;  // 2^-10
  IlqrOptions ilqr;
};

// A tool to rigidly bind to the gripper once the grasp step is reached: the
// head pose is captured in world coordinates; the grip-to-head transform is
// re-anchored from the nominal trajectory each consensus iteration.
struct ToolSpec {
  Vec head_position;
  Vec head_axis;  // unit; the head frame's x axis maps onto it
};

Pose tool_head_pose(const ToolSpec& tool);

struct Problem {
  explicit Problem(KinematicChain chain) : arm(std::move(chain)) {}

  KinematicChain arm;
  std::optional<ToolSpec> tool;
  Vec q0;
  double dt = 0.01;
  int horizon = 100;
  int grasp_step = 50;  // t' (tool binding and grip-box timestep)
  std::vector<CostTerm> terms;
  ConstraintSet constraints;
  SolverParams params;
  // Unit direction for the final-pose manipulability diagnostics; reported
  // even when no manipulability term is active so strategies stay comparable.
  std::optional<Vec> manip_direction;
  // Extension hook: extra stage costs evaluated like built-in terms
  // (q-space derivatives); used for custom objectives and tests.
  std::vector<std::function<CostEvaluation(const Vec& q, int t)>> custom_terms;
};

struct IterationRecord {
  int outer = 0;
  int inner = 0;
  double cost = 0.0;   // augmented cost after the accepted step
  double alpha = 0.0;
  bool no_progress = false;
};

struct ResidualRecord {
  int outer = 0;
  double primal = 0.0;
  double dual = 0.0;
};

struct ManipDiagnostics {
  ManipulabilityEllipsoid ellipsoid;  // weighted, at the final configuration
  double transmission = 0.0;          // along the requested direction (0 if none)
  double index = 0.0;
  double impact_proxy = 0.0;
  bool proxy_used_bare_chain = false;
  bool has_direction = false;
};

struct SolveReport {
  Trajectory trajectory;
  Vec z_x, z_u;
  std::vector<IterationRecord> inner_history;
  std::vector<ResidualRecord> residual_history;
  int outer_iterations = 0;
  bool converged = false;        // both residuals within tolerance
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double task_cost = 0.0;        // task terms only, final nominal
  double augmented_cost = 0.0;
  std::map<std::string, double> cost_breakdown;
  bool grip_box_feasible_consensus = false;
  double grip_box_violation_nominal = 0.0;
  bool controls_within_bounds = false;
  double control_violation = 0.0;
  std::optional<ManipDiagnostics> manip;
  int singular_cap_events = 0;
  int spd_regularize_events = 0;
  double solve_seconds = 0.0;
};

SolveReport solve(const Problem& problem);

}  // namespace tacopt
