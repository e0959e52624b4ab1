#include "tacopt/chain.hpp"

#include <cmath>

namespace tacopt {

namespace {

Isometry3 dh_step(double a, double d, double alpha) {
  // Modified DH: trans_x(a) * rot_x(alpha) * trans_z(d); joint rotates about z.
  Isometry3 t = Isometry3::Identity();
  t.translate(Vec3(a, 0.0, 0.0));
  t.rotate(Eigen::AngleAxisd(alpha, Vec3::UnitX()));
  t.translate(Vec3(0.0, 0.0, d));
  return t;
}

void check_rotation(const Mat& r, const char* name) {
  if (r.rows() != r.cols()) throw DimensionError("rotation must be square");
  Mat err = r.transpose() * r - Mat::Identity(r.rows(), r.cols());
  if (err.cwiseAbs().maxCoeff() > 1e-9)
    throw GeometryError(std::string(name) + ": rotation is not orthonormal");
  if (r.determinant() < 0.0)
    throw GeometryError(std::string(name) + ": rotation is reflected");
}

}  // namespace

Pose Pose::identity(int dim) {
  return Pose{Vec::Zero(dim), Mat::Identity(dim, dim)};
}

KinematicChain::KinematicChain(std::vector<JointSpec> joints, Isometry3 flange,
                               int workspace_dim, Vec q_lower, Vec q_upper, Vec qdot_limit)
    : joints_(std::move(joints)),
      flange_(std::move(flange)),
      workspace_dim_(workspace_dim),
      q_lower_(std::move(q_lower)),
      q_upper_(std::move(q_upper)),
      qdot_limit_(std::move(qdot_limit)) {
  const auto n = static_cast<Eigen::Index>(joints_.size());
  require(n >= 1, "chain needs at least one joint");
  require(workspace_dim_ == 2 || workspace_dim_ == 3, "workspace_dim must be 2 or 3");
  if (q_lower_.size() != n || q_upper_.size() != n || qdot_limit_.size() != n)
    throw DimensionError("joint limit arrays must match dof");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(q_lower_[i] < q_upper_[i], "joint limits must satisfy lower < upper");
    require(qdot_limit_[i] > 0.0, "velocity limits must be positive");
    require(std::abs(joints_[static_cast<size_t>(i)].axis.norm() - 1.0) < 1e-9,
            "joint axis must be unit length");
  }
}

KinematicChain KinematicChain::planar(const std::vector<double>& link_lengths) {
  const auto n = static_cast<Eigen::Index>(link_lengths.size());
  return planar(link_lengths, Vec::Constant(n, -3.05), Vec::Constant(n, 3.05),
                Vec::Constant(n, 4.0));
}

KinematicChain KinematicChain::planar(const std::vector<double>& link_lengths,
                                      Vec q_lower, Vec q_upper, Vec qdot_limit) {
  require(!link_lengths.empty(), "planar chain needs at least one link");
  std::vector<JointSpec> joints(link_lengths.size());
  for (size_t i = 0; i < link_lengths.size(); ++i) {
    require(link_lengths[i] > 0.0, "link lengths must be positive");
    joints[i].axis = Vec3::UnitZ();
    joints[i].parent_to_joint = Isometry3::Identity();
    if (i > 0) joints[i].parent_to_joint.translation() = Vec3(link_lengths[i - 1], 0, 0);
  }
  Isometry3 flange = Isometry3::Identity();
  flange.translation() = Vec3(link_lengths.back(), 0, 0);
  return KinematicChain(std::move(joints), flange, 2, std::move(q_lower),
                        std::move(q_upper), std::move(qdot_limit));
}

KinematicChain KinematicChain::panda() {
  // (a, d, alpha) per modified-DH row, flange at d = 0.107.
  const double rows[7][3] = {
      {0.0, 0.333, 0.0},           {0.0, 0.0, -M_PI_2}, {0.0, 0.316, M_PI_2},
      {0.0825, 0.0, M_PI_2},       {-0.0825, 0.384, -M_PI_2},
      {0.0, 0.0, M_PI_2},          {0.088, 0.0, M_PI_2}};
  std::vector<JointSpec> joints(7);
  for (int i = 0; i < 7; ++i) {
    joints[static_cast<size_t>(i)].parent_to_joint = dh_step(rows[i][0], rows[i][1], rows[i][2]);
    joints[static_cast<size_t>(i)].axis = Vec3::UnitZ();
  }
  Isometry3 flange = Isometry3::Identity();
  flange.translation() = Vec3(0, 0, 0.107);

  Vec q_lower(7), q_upper(7), qdot(7);
  q_lower << -2.8973, -1.7628, -2.8973, -3.0718, -2.8973, -0.0175, -2.8973;
  q_upper << 2.8973, 1.7628, 2.8973, -0.0698, 2.8973, 3.7525, 2.8973;
  qdot << 2.1750, 2.1750, 2.1750, 2.1750, 2.6100, 2.6100, 2.6100;
  return KinematicChain(std::move(joints), flange, 3, std::move(q_lower),
                        std::move(q_upper), std::move(qdot));
}

const Isometry3& KinematicChain::tool_transform() const {
  require(tool_.has_value(), "chain has no tool attached");
  return *tool_;
}

Isometry3 KinematicChain::accumulate(const Vec& q, bool include_tool,
                                     std::vector<Vec3>* origins,
                                     std::vector<Vec3>* axes) const {
  if (q.size() != dof()) throw DimensionError("q size does not match dof");
  if (!q.allFinite()) throw NumericalError("q contains non-finite values");
  Isometry3 t = Isometry3::Identity();
  for (size_t i = 0; i < joints_.size(); ++i) {
    t = t * joints_[i].parent_to_joint;
    if (origins) origins->push_back(t.translation());
    if (axes) axes->push_back(t.linear() * joints_[i].axis);
    t = t * Eigen::AngleAxisd(q[static_cast<Eigen::Index>(i)], joints_[i].axis);
  }
  t = t * flange_;
  if (include_tool && tool_) t = t * (*tool_);
  return t;
}

Pose KinematicChain::forward_kinematics(const Vec& q) const {
  return project_pose(accumulate(q, true, nullptr, nullptr), workspace_dim_);
}

Pose KinematicChain::gripper_pose(const Vec& q) const {
  return project_pose(accumulate(q, false, nullptr, nullptr), workspace_dim_);
}

Mat KinematicChain::point_jacobian(const Vec& q, bool include_tool) const {
  std::vector<Vec3> origins, axes;
  origins.reserve(joints_.size());
  axes.reserve(joints_.size());
  Vec3 tip = accumulate(q, include_tool, &origins, &axes).translation();
  Mat j(3, dof());
  for (int i = 0; i < dof(); ++i) {
    const auto k = static_cast<size_t>(i);
    j.col(i) = axes[k].cross(tip - origins[k]);
  }
  return j;
}

Mat KinematicChain::position_jacobian(const Vec& q) const {
  return point_jacobian(q, true).topRows(workspace_dim_);
}

Mat KinematicChain::gripper_position_jacobian(const Vec& q) const {
  return point_jacobian(q, false).topRows(workspace_dim_);
}

Mat KinematicChain::full_jacobian(const Vec& q) const {
  std::vector<Vec3> origins, axes;
  Vec3 tip = accumulate(q, true, &origins, &axes).translation();
  Mat j(6, dof());
  for (int i = 0; i < dof(); ++i) {
    const auto k = static_cast<size_t>(i);
    j.col(i).head<3>() = axes[k].cross(tip - origins[k]);
    j.col(i).tail<3>() = axes[k];
  }
  return j;
}

std::vector<Vec> KinematicChain::link_points(const Vec& q) const {
  std::vector<Vec3> origins;
  Isometry3 grip = accumulate(q, false, &origins, nullptr);
  std::vector<Vec> pts;
  pts.reserve(origins.size() + 2);
  for (const auto& o : origins) pts.push_back(o.head(workspace_dim_));
  pts.push_back(grip.translation().head(workspace_dim_));
  if (tool_) pts.push_back((grip * (*tool_)).translation().head(workspace_dim_));
  return pts;
}

double KinematicChain::reach() const {
  Vec q = Vec::Zero(dof());
  double len = 0.0;
  // Upper bound: sum of consecutive link-point distances in the zero posture.
  auto pts = link_points(q);
  for (size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
  return len;
}

KinematicChain KinematicChain::with_tool(const Isometry3& grip_to_tip) const {
  KinematicChain out = *this;
  out.tool_ = grip_to_tip;
  return out;
}

KinematicChain KinematicChain::without_tool() const {
  KinematicChain out = *this;
  out.tool_.reset();
  return out;
}

Isometry3 embed_pose(const Pose& pose) {
  Isometry3 t = Isometry3::Identity();
  if (pose.dim() == 3) {
    t.linear() = pose.rotation;
    t.translation() = pose.position;
  } else if (pose.dim() == 2) {
    t.linear().topLeftCorner<2, 2>() = pose.rotation;
    t.translation().head<2>() = pose.position;
  } else {
    throw DimensionError("pose must be 2D or 3D");
  }
  return t;
}

Pose project_pose(const Isometry3& t, int workspace_dim) {
  Pose p;
  p.position = t.translation().head(workspace_dim);
  p.rotation = t.linear().topLeftCorner(workspace_dim, workspace_dim);
  return p;
}

Isometry3 relative_transform(const Pose& base, const Pose& target) {
  check_rotation(base.rotation, "base");
  check_rotation(target.rotation, "target");
  if (base.dim() != target.dim()) throw DimensionError("pose dimensions differ");
  return embed_pose(base).inverse() * embed_pose(target);
}

KinematicChain attach_tool(const KinematicChain& chain, const Pose& grip_world,
                           const Pose& tool_head_world) {
  if (grip_world.dim() != chain.workspace_dim())
    throw DimensionError("grip pose dimension does not match chain workspace");
  return chain.with_tool(relative_transform(grip_world, tool_head_world));
}

}  // namespace tacopt
