#pragma once

#include "tacopt/chain.hpp"
#include "tacopt/types.hpp"

namespace tacopt {

// Velocity manipulability ellipsoid at a configuration: the image of the unit
// ball of joint velocities under the (optionally weighted) position Jacobian.
struct ManipulabilityEllipsoid {
  Mat m;             // J W W^T J^T (or J J^T unweighted), workspace_dim square
  Vec center;        // effective end-effector position
  Vec eigenvalues;   // ascending, >= 0
  Mat eigenvectors;  // columns, ordered with eigenvalues
};

// Normalized joint-weight diagonal: qdot_limit / max(qdot_limit), so the
// fastest joint has weight one. Returned as a diagonal vector of size dof.
Vec joint_weights(const KinematicChain& chain);

// Ellipsoid of the effective end-effector. `weighted` applies joint_weights.
ManipulabilityEllipsoid velocity_manipulability(const KinematicChain& chain,
                                                const Vec& q, bool weighted);

// Achievable velocity transmission along unit direction u: sqrt(u^T M u).
double directional_transmission(const Mat& m, const Vec& u);

// Classical volume index sqrt(det M). det in [-1e-12, 0) clamps to zero;
// more negative throws NumericalError.
double manipulability_index(const Mat& m);

struct ImpactProxy {
  double value = 0.0;          // sqrt(n^T M n) along the strike direction
  bool used_bare_chain = false;  // true if the chain had no tool attached
};

// Strike-speed proxy along unit direction n, evaluated on the tool-extended
// chain when one is attached (flagged otherwise), using weighted M.
ImpactProxy impact_velocity_proxy(const KinematicChain& chain, const Vec& q, const Vec& n);

}  // namespace tacopt
