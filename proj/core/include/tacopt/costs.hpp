#pragma once

#include <vector>

#include "tacopt/chain.hpp"
#include "tacopt/types.hpp"

namespace tacopt {

enum class CostKind {
  Orientation,       // squared alignment of gripper grasp axis vs handle axis
  Position,          // squared end-effector position error
  Direction,         // squared sphere-log of pointing axis vs target direction
  JointLimit,        // squared violation distance outside [q_lower, q_upper]
  ManipDirectional,  // inverse squared transmission along a direction
  ManipDeterminant,  // inverse squared determinant of weighted manipulability
  ManipTracking,     // squared affine-invariant distance to a desired ellipsoid
};

const char* cost_kind_name(CostKind kind);

// When a term contributes: every timestep, or one specific timestep.
struct Schedule {
  bool every_step = true;
  int step = 0;

  static Schedule always() { return {}; }
  static Schedule at(int t) { return {false, t}; }
  bool active(int t) const { return every_step || t == step; }
};

struct CostTerm {
  CostKind kind{};
  double weight = 1.0;
  Schedule schedule = Schedule::always();
  // Evaluate through the tool-extended chain when one is bound (position,
  // direction and manipulability terms); orientation and joint limits always
  // act on the bare arm.
  bool use_tool = false;

  Vec axis;        // handle axis (orientation), target direction v_h
                   // (direction), or transmission direction n (manip)
  Vec target;      // desired end-effector position (position term)
  Vec local_axis;  // pointing axis in the end-effector frame (direction term)
  Mat desired;     // desired ellipsoid matrix (tracking term)
};

struct CostEvaluation {
  double value = 0.0;
  Vec grad;  // d/dq, size dof
  Mat hess;  // positive semidefinite approximation, dof x dof
  bool singular_capped = false;   // a manipulability denominator was clamped
  bool spd_regularized = false;   // an SPD log needed eigenvalue regularization

  static CostEvaluation zero(int dof);
  CostEvaluation& operator+=(const CostEvaluation& other);
};

// --- Individual terms (value + d/dq + PSD Hessian approximation) -----------

// w * ((gripper grasp axis) . handle_axis)^2; grasp axis is the gripper
// frame's y column. Zero exactly when the grasp is perpendicular to the handle.
CostEvaluation cost_orientation(const KinematicChain& chain, const Vec& q,
                                const Vec& handle_axis, double weight);

CostEvaluation cost_position(const KinematicChain& chain, const Vec& q,
                             const Vec& target, double weight);

// w * ||Log_{target_dir}(R(q) * local_axis)||^2 on the unit sphere.
CostEvaluation cost_direction(const KinematicChain& chain, const Vec& q,
                              const Vec& local_axis, const Vec& target_dir,
                              double weight);

// Sum over joints outside their bounds of the squared distance to the nearest
// violated bound (activation-weighted; inactive joints contribute nothing).
CostEvaluation cost_joint_limits(const KinematicChain& chain, const Vec& q,
                                 double weight = 1.0);

// w / (n^T M n)^2... see each function for the exact scalar; gradients and
// Hessians by central differences (the Hessian symmetrized and floored to PSD).
CostEvaluation cost_manip_directional(const KinematicChain& chain, const Vec& q,
                                      const Vec& n, double weight);
CostEvaluation cost_manip_determinant(const KinematicChain& chain, const Vec& q,
                                      double weight);
CostEvaluation cost_manip_tracking(const KinematicChain& chain, const Vec& q,
                                   const Mat& desired, double weight);

// Scalar values only (no derivatives); used by the finite-difference paths,
// diagnostics and tests.
double cost_term_value(const CostTerm& term, const KinematicChain& chain, const Vec& q);

// --- Assembly ---------------------------------------------------------------

struct CostContext {
  const KinematicChain* arm = nullptr;       // bare chain
  const KinematicChain* extended = nullptr;  // tool-extended; null if no tool
  int horizon = 0;                           // T

  const KinematicChain& chain_for(const CostTerm& term) const {
    return (term.use_tool && extended) ? *extended : *arm;
  }
};

CostEvaluation evaluate_term(const CostTerm& term, const CostContext& ctx,
                             const Vec& q, int t);

// Sum of all terms active at timestep t (control effort is not included here;
// the solver owns the quadratic control cost).
CostEvaluation stage_cost(const std::vector<CostTerm>& terms, const CostContext& ctx,
                          const Vec& q, int t);

// Desired ellipsoid with semi-axis `major` along unit `direction` and `minor`
// across it: (major^2 - minor^2) d d^T + minor^2 I.
Mat make_desired_ellipsoid(const Vec& direction, double major, double minor);

// Clamp eigenvalues of a symmetric matrix at zero.
Mat psd_floor(const Mat& h);

}  // namespace tacopt
