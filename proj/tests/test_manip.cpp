#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tacopt/chain.hpp"
#include "tacopt/manipulability.hpp"

using namespace tacopt;

namespace {
bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

const Vec kq = (Vec(3) << 0.3, -0.2, 0.1).finished();
}  // namespace

TEST_CASE("joint weights normalize to the fastest joint") {
  const auto even = KinematicChain::planar({1.0, 1.0, 1.0});
  CHECK((joint_weights(even) - Vec::Ones(3)).norm() < 1e-15);

  const auto uneven = KinematicChain::planar({1.0, 1.0, 1.0}, Vec::Constant(3, -3.0),
                                             Vec::Constant(3, 3.0),
                                             (Vec(3) << 4.0, 2.0, 1.0).finished());
  const Vec w = joint_weights(uneven);
  CHECK(near(w(0), 1.0, 1e-15));
  CHECK(near(w(1), 0.5, 1e-15));
  CHECK(near(w(2), 0.25, 1e-15));
}

TEST_CASE("velocity ellipsoid matches the frozen J J^T") {
  const auto chain = KinematicChain::planar({1.0, 1.0, 1.0});
  const auto ell = velocity_manipulability(chain, kq, false);
  CHECK(near(ell.m(0, 0), 0.4814366632304406, 1e-13));
  CHECK(near(ell.m(0, 1), -2.5250023751910873, 1e-13));
  CHECK(near(ell.m(1, 1), 13.448721484120201, 1e-12));
  CHECK(near(ell.m(1, 0), ell.m(0, 1), 0.0));
  CHECK((ell.center - chain.forward_kinematics(kq).position).norm() < 1e-14);

  // Ascending spectrum with orthonormal axes reconstructing M.
  REQUIRE(ell.eigenvalues.size() == 2);
  CHECK(ell.eigenvalues(0) <= ell.eigenvalues(1));
  CHECK(near(ell.eigenvalues(0), 0.0071155856107183446, 1e-12));
  CHECK(near(ell.eigenvalues(1), 13.923042561739923, 1e-11));
  CHECK((ell.eigenvectors * ell.eigenvectors.transpose() - Mat::Identity(2, 2)).norm() < 1e-12);
  const Mat rebuilt =
      ell.eigenvectors * ell.eigenvalues.asDiagonal() * ell.eigenvectors.transpose();
  CHECK((rebuilt - ell.m).norm() < 1e-12);

  // Equal velocity limits make the weighted ellipsoid identical.
  const auto weighted = velocity_manipulability(chain, kq, true);
  CHECK((weighted.m - ell.m).norm() < 1e-13);
}

TEST_CASE("weighted ellipsoid applies the normalized limits") {
  const auto chain = KinematicChain::planar({1.0, 1.0, 1.0}, Vec::Constant(3, -3.0),
                                            Vec::Constant(3, 3.0),
                                            (Vec(3) << 4.0, 2.0, 1.0).finished());
  const auto ell = velocity_manipulability(chain, kq, true);
  CHECK(near(ell.m(0, 0), 0.37760608649652566, 1e-13));
  CHECK(near(ell.m(0, 1), -1.9002894948240108, 1e-13));
  CHECK(near(ell.m(1, 1), 9.6225458129370747, 1e-12));
}

TEST_CASE("directional transmission frozen value") {
  const auto chain = KinematicChain::planar({1.0, 1.0, 1.0});
  const auto ell = velocity_manipulability(chain, kq, true);
  const Vec up = (Vec(2) << 0.0, 1.0).finished();
  CHECK(near(directional_transmission(ell.m, up), 3.6672498529715973, 1e-12));

  // Stretched arm: no velocity along the arm axis.
  const auto stretched = velocity_manipulability(chain, Vec::Zero(3), true);
  CHECK(near(directional_transmission(stretched.m, (Vec(2) << 1.0, 0.0).finished()), 0.0,
             1e-12));
  CHECK(near(directional_transmission(stretched.m, up), std::sqrt(14.0), 1e-12));
}

TEST_CASE("manipulability index frozen value and clamping") {
  const auto chain = KinematicChain::planar({1.0, 1.0, 1.0});
  const auto ell = velocity_manipulability(chain, kq, true);
  CHECK(near(manipulability_index(ell.m), 0.31475482730172172, 1e-12));
  CHECK(near(manipulability_index(velocity_manipulability(chain, Vec::Zero(3), true).m), 0.0,
             1e-9));

  Mat tiny_negative(1, 1), very_negative(1, 1);
  tiny_negative << -1e-13;
  very_negative << -1e-6;
  CHECK(manipulability_index(tiny_negative) == 0.0);
  CHECK_THROWS_AS(manipulability_index(very_negative), NumericalError);
}

TEST_CASE("impact proxy flags bare chains and follows the tool") {
  const auto arm = KinematicChain::planar({1.0, 1.0, 1.0});
  Vec n(2);
  n << 0.0, 1.0;
  const auto bare = impact_velocity_proxy(arm, kq, n);
  CHECK(bare.used_bare_chain);
  CHECK(near(bare.value, directional_transmission(velocity_manipulability(arm, kq, true).m, n),
             1e-14));

  Pose head;
  head.position = (Vec(2) << 3.2, 1.0).finished();
  head.rotation = Mat::Identity(2, 2);
  const auto extended = attach_tool(arm, arm.gripper_pose(kq), head);
  const auto armed = impact_velocity_proxy(extended, kq, n);
  CHECK_FALSE(armed.used_bare_chain);
  CHECK(near(armed.value,
             directional_transmission(velocity_manipulability(extended, kq, true).m, n), 1e-14));
  CHECK(armed.value != doctest::Approx(bare.value).epsilon(1e-6));
}
