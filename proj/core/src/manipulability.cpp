#include "tacopt/manipulability.hpp"

#include <cmath>

#include "tacopt/geometry.hpp"

namespace tacopt {

Vec joint_weights(const KinematicChain& chain) {
  const Vec& lim = chain.qdot_limit();
  return lim / lim.maxCoeff();
}

ManipulabilityEllipsoid velocity_manipulability(const KinematicChain& chain,
                                                const Vec& q, bool weighted) {
  Mat j = chain.position_jacobian(q);
  if (weighted) j = j * joint_weights(chain).asDiagonal();
  ManipulabilityEllipsoid out;
  out.m = j * j.transpose();
  out.center = chain.forward_kinematics(q).position;
  Eigen::SelfAdjointEigenSolver<Mat> eig(out.m);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  out.eigenvalues = eig.eigenvalues().cwiseMax(0.0);
  out.eigenvectors = eig.eigenvectors();
  return out;
}

double directional_transmission(const Mat& m, const Vec& u) {
  if (u.size() != m.rows()) throw DimensionError("direction size mismatch");
  if (std::abs(u.norm() - 1.0) > kUnitTol)
    throw GeometryError("direction must be unit length");
  double v = u.dot(m * u);
  return std::sqrt(std::max(v, 0.0));
}

double manipulability_index(const Mat& m) {
  double det = m.determinant();
  if (det < -1e-12) throw NumericalError("manipulability matrix has negative determinant");
  return std::sqrt(std::max(det, 0.0));
}

ImpactProxy impact_velocity_proxy(const KinematicChain& chain, const Vec& q, const Vec& n) {
  ImpactProxy out;
  out.used_bare_chain = !chain.has_tool();
  auto ell = velocity_manipulability(chain, q, true);
  out.value = directional_transmission(ell.m, n);
  return out;
}

}  // namespace tacopt
