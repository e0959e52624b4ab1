#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tacopt/chain.hpp"
#include "tacopt/oracle.hpp"

using namespace tacopt;

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }
bool near_vec(const Vec& a, const Vec& b, double tol) { return (a - b).norm() <= tol; }

// Closed-form planar FK on cumulative angles; kept separate from the library
// so the chain module is checked against independent arithmetic.
Vec planar_tip(const std::vector<double>& lengths, const Vec& q) {
  Vec p = Vec::Zero(2);
  double th = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    th += q(i);
    p(0) += lengths[static_cast<size_t>(i)] * std::cos(th);
    p(1) += lengths[static_cast<size_t>(i)] * std::sin(th);
  }
  return p;
}

}  // namespace

TEST_CASE("planar chain basic shape") {
  const auto chain = KinematicChain::planar({1.0, 1.0, 1.0});
  CHECK(chain.dof() == 3);
  CHECK(chain.workspace_dim() == 2);
  CHECK(chain.is_planar());
  CHECK_FALSE(chain.has_tool());
  CHECK(near(chain.reach(), 3.0, 1e-15));
  for (int i = 0; i < 3; ++i) {
    CHECK(near(chain.q_lower()(i), -3.05, 1e-15));
    CHECK(near(chain.q_upper()(i), 3.05, 1e-15));
    CHECK(near(chain.qdot_limit()(i), 4.0, 1e-15));
  }
}

TEST_CASE("planar forward kinematics at axis configurations") {
  const auto chain = KinematicChain::planar({1.0, 1.0, 1.0});
  Vec q = Vec::Zero(3);
  Pose pose = chain.forward_kinematics(q);
  CHECK(near_vec(pose.position, (Vec(2) << 3, 0).finished(), 1e-14));
  CHECK(near((pose.rotation - Mat::Identity(2, 2)).norm(), 0.0, 1e-14));

  q << M_PI / 2, 0, 0;
  pose = chain.forward_kinematics(q);
  CHECK(near_vec(pose.position, (Vec(2) << 0, 3).finished(), 1e-14));
}

TEST_CASE("planar forward kinematics frozen case") {
  const auto chain = KinematicChain::planar({1.0, 1.0, 1.0});
  Vec q(3);
  q << 0.3, -0.2, 0.1;
  const Pose pose = chain.forward_kinematics(q);
  CHECK(near(pose.position(0), 2.9304072322448738, 1e-14));
  CHECK(near(pose.position(1), 0.59402295410322892, 1e-14));
  // Orientation is the cumulative joint angle, 0.2 rad.
  CHECK(near(pose.rotation(0, 0), std::cos(0.2), 1e-14));
  CHECK(near(pose.rotation(1, 0), std::sin(0.2), 1e-14));
  CHECK(near_vec(pose.position, planar_tip({1, 1, 1}, q), 1e-14));
  // gripper_pose and forward_kinematics agree while no tool is bound.
  CHECK(near_vec(chain.gripper_pose(q).position, pose.position, 0.0));
}

TEST_CASE("planar jacobian matches closed form and finite differences") {
  const auto chain = KinematicChain::planar({1.0, 1.0, 1.0});
  Vec q(3);
  q << 0.3, -0.2, 0.1;
  const Mat j = chain.position_jacobian(q);
  REQUIRE(j.rows() == 2);
  REQUIRE(j.cols() == 3);
  // Column i is the perpendicular of the segment from joint i to the tip.
  CHECK(near(j(0, 0), -0.59402295410322892, 1e-14));
  CHECK(near(j(1, 0), 2.9304072322448738, 1e-14));

  const Mat fd = oracle::fd_jacobian(
      [&](const Vec& qq) { return Vec(chain.forward_kinematics(qq).position); }, q, 1e-6);
  CHECK((j - fd).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("full jacobian embeds the planar rows") {
  const auto chain = KinematicChain::planar({1.0, 1.0, 1.0});
  Vec q(3);
  q << 0.7, 0.4, -0.9;
  const Mat j6 = chain.full_jacobian(q);
  REQUIRE(j6.rows() == 6);
  REQUIRE(j6.cols() == 3);
  const Mat jp = chain.position_jacobian(q);
  CHECK((j6.topRows(2) - jp).norm() < 1e-14);
  CHECK(j6.row(2).norm() < 1e-14);           // no out-of-plane velocity
  for (int i = 0; i < 3; ++i) CHECK(near(j6(5, i), 1.0, 1e-14));  // all axes +z
}

TEST_CASE("link points trace the arm") {
  const auto chain = KinematicChain::planar({1.0, 1.0, 1.0});
  Vec q(3);
  q << 0.3, -0.2, 0.1;
  const auto pts = chain.link_points(q);
  REQUIRE(pts.size() == 4);
  CHECK(near(pts.front().norm(), 0.0, 1e-14));
  CHECK(near_vec(pts.back(), chain.forward_kinematics(q).position, 1e-14));
  CHECK(near_vec(pts[1], (Vec(2) << std::cos(0.3), std::sin(0.3)).finished(), 1e-14));
}

TEST_CASE("panda chain against an independent DH composition") {
  const auto chain = KinematicChain::panda();
  CHECK(chain.dof() == 7);
  CHECK(chain.workspace_dim() == 3);
  CHECK_FALSE(chain.is_planar());
  CHECK(near(chain.qdot_limit()(0), 2.175, 1e-15));
  CHECK(near(chain.qdot_limit()(6), 2.61, 1e-15));

  // Flange position at the zero configuration: (0.088, 0, 0.926).
  const Pose zero = chain.forward_kinematics(Vec::Zero(7));
  CHECK(near(zero.position(0), 0.088, 1e-12));
  CHECK(near(zero.position(1), 0.0, 1e-12));
  CHECK(near(zero.position(2), 0.926, 1e-12));

  // A bent posture, frozen from an external modified-DH chain product.
  Vec q(7);
  q << 0.0, -0.6, 0.0, -2.2, 0.0, 1.8, 0.8;
  const Pose ready = chain.forward_kinematics(q);
  CHECK(near(ready.position(0), 0.3834118680401124, 1e-9));
  CHECK(near(ready.position(1), 0.0, 1e-9));
  CHECK(near(ready.position(2), 0.62425704133473059, 1e-9));

  const Mat fd = oracle::fd_jacobian(
      [&](const Vec& qq) { return Vec(chain.forward_kinematics(qq).position); }, q, 1e-6);
  CHECK((chain.position_jacobian(q) - fd).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("tool binding moves the effective end-effector") {
  const auto arm = KinematicChain::planar({1.0, 1.0, 1.0});
  Vec q(3);
  q << 0.9, -0.4, 0.3;
  Pose head;
  head.position = (Vec(2) << 1.2, 1.4).finished();
  const double ang = 0.6;
  head.rotation = (Mat(2, 2) << std::cos(ang), -std::sin(ang), std::sin(ang), std::cos(ang))
                      .finished();

  const auto extended = attach_tool(arm, arm.gripper_pose(q), head);
  CHECK(extended.has_tool());
  // At the binding configuration the effective tip reproduces the head pose.
  const Pose tip = extended.forward_kinematics(q);
  CHECK(near_vec(tip.position, head.position, 1e-12));
  CHECK((tip.rotation - head.rotation).norm() < 1e-12);
  // The gripper accessors still address the flange.
  CHECK(near_vec(extended.gripper_pose(q).position, arm.gripper_pose(q).position, 1e-14));
  CHECK(near(extended.reach(), arm.reach() + (head.position - arm.gripper_pose(q).position).norm(),
             1e-12));
  // Tool tip appears as one extra render point.
  CHECK(extended.link_points(q).size() == arm.link_points(q).size() + 1);

  const auto stripped = extended.without_tool();
  CHECK_FALSE(stripped.has_tool());
  CHECK(near_vec(stripped.forward_kinematics(q).position, arm.forward_kinematics(q).position,
                 1e-14));
}

TEST_CASE("embed and project poses round trip") {
  Pose pose;
  pose.position = (Vec(2) << 0.4, -1.1).finished();
  const double ang = -0.8;
  pose.rotation = (Mat(2, 2) << std::cos(ang), -std::sin(ang), std::sin(ang), std::cos(ang))
                      .finished();
  const Pose back = project_pose(embed_pose(pose), 2);
  CHECK(near_vec(back.position, pose.position, 1e-15));
  CHECK((back.rotation - pose.rotation).norm() < 1e-15);
}

TEST_CASE("relative transform validates rotations") {
  Pose base = Pose::identity(2);
  Pose target = Pose::identity(2);
  target.position << 1.0, 2.0;
  const Isometry3 rel = relative_transform(base, target);
  CHECK(near(rel.translation()(0), 1.0, 1e-15));
  CHECK(near(rel.translation()(1), 2.0, 1e-15));

  Pose sheared = target;
  sheared.rotation(0, 1) = 0.3;  // no longer orthonormal
  CHECK_THROWS_AS(relative_transform(base, sheared), GeometryError);
}

TEST_CASE("dimension mismatches throw") {
  const auto chain = KinematicChain::planar({1.0, 1.0});
  CHECK_THROWS_AS(chain.forward_kinematics(Vec::Zero(3)), DimensionError);
  CHECK_THROWS_AS(chain.position_jacobian(Vec::Zero(1)), DimensionError);
}
