#pragma once

#include <optional>
#include <vector>

#include "tacopt/types.hpp"

namespace tacopt {

// Rigid pose in the chain's workspace: position in R^w, rotation in SO(w),
// with w = 2 for planar chains and w = 3 for spatial ones.
struct Pose {
  Vec position;
  Mat rotation;

  int dim() const { return static_cast<int>(position.size()); }
  static Pose identity(int dim);
};

// One revolute joint: a fixed transform from the parent frame to the joint
// frame, then a rotation about `axis` (unit, in the joint frame) by q_i.
struct JointSpec {
  Isometry3 parent_to_joint = Isometry3::Identity();
  Vec3 axis = Vec3::UnitZ();
};

// Serial revolute-joint chain. Planar chains are represented internally in 3D
// (all joint axes +z, links in the xy-plane) and project poses/Jacobians down
// to their 2D workspace. A rigidly attached tool, when present, extends the
// chain by one fixed segment: the effective end-effector becomes the tool tip
// while gripper_* accessors keep addressing the bare flange.
class KinematicChain {
 public:
  KinematicChain(std::vector<JointSpec> joints, Isometry3 flange, int workspace_dim,
                 Vec q_lower, Vec q_upper, Vec qdot_limit);

  // n equal planar links; joint limits +-3.05 rad, velocity limits 4 rad/s
  // unless given explicitly.
  static KinematicChain planar(const std::vector<double>& link_lengths);
  static KinematicChain planar(const std::vector<double>& link_lengths, Vec q_lower,
                               Vec q_upper, Vec qdot_limit);

  // 7-DoF Panda arm (modified-DH parameters and published joint/velocity limits).
  static KinematicChain panda();

  int dof() const { return static_cast<int>(joints_.size()); }
  int workspace_dim() const { return workspace_dim_; }
  bool is_planar() const { return workspace_dim_ == 2; }
  const Vec& q_lower() const { return q_lower_; }
  const Vec& q_upper() const { return q_upper_; }
  const Vec& qdot_limit() const { return qdot_limit_; }

  bool has_tool() const { return tool_.has_value(); }
  const Isometry3& tool_transform() const;

  // Pose of the effective end-effector (tool tip if attached, else gripper).
  Pose forward_kinematics(const Vec& q) const;
  // Pose of the gripper flange regardless of any attached tool.
  Pose gripper_pose(const Vec& q) const;

  // Positional Jacobian (workspace_dim x dof) of the effective end-effector.
  Mat position_jacobian(const Vec& q) const;
  Mat gripper_position_jacobian(const Vec& q) const;
  // Full geometric Jacobian (6 x dof): linear rows then angular rows, world
  // frame. Planar chains embed into 3D (angular rows are the z components).
  Mat full_jacobian(const Vec& q) const;

  // Workspace positions of the base, each joint origin, the gripper, and the
  // tool tip when attached. Used for rendering and reach checks.
  std::vector<Vec> link_points(const Vec& q) const;

  double reach() const;  // base-to-effective-tip length with all links straight

  KinematicChain with_tool(const Isometry3& grip_to_tip) const;
  KinematicChain without_tool() const;

 private:
  Isometry3 accumulate(const Vec& q, bool include_tool,
                       std::vector<Vec3>* origins, std::vector<Vec3>* axes) const;
  Mat point_jacobian(const Vec& q, bool include_tool) const;

  std::vector<JointSpec> joints_;
  Isometry3 flange_;
  std::optional<Isometry3> tool_;
  int workspace_dim_;
  Vec q_lower_, q_upper_, qdot_limit_;
};

// Embed a workspace pose into 3D (planar poses rotate about +z, sit at z = 0).
Isometry3 embed_pose(const Pose& pose);
// Project a 3D transform onto a w-dimensional Pose.
Pose project_pose(const Isometry3& t, int workspace_dim);

// base^{-1} * target, both given in world coordinates. Rotations must be
// orthonormal with determinant +1 (checked to 1e-9).
Isometry3 relative_transform(const Pose& base, const Pose& target);

// Bind a tool to the chain: the fixed gripper-to-tip segment is inferred from
// a world gripper pose and a world tool-head pose captured at the same instant.
KinematicChain attach_tool(const KinematicChain& chain, const Pose& grip_world,
                           const Pose& tool_head_world);

}  // namespace tacopt
