#include "tacopt/costs.hpp"

#include <cmath>

#include "tacopt/geometry.hpp"
#include "tacopt/manipulability.hpp"

namespace tacopt {

namespace {

constexpr double kFdGradStep = 1e-5;
constexpr double kFdHessStep = 1e-4;

Vec3 embed3(const Vec& v) {
  Vec3 out = Vec3::Zero();
  out.head(v.size()) = v;
  return out;
}

void check_unit_axis(const Vec& v, const char* name) {
  if (std::abs(v.norm() - 1.0) > kUnitTol)
    throw GeometryError(std::string(name) + " must be unit length");
}

template <typename F>
Vec fd_gradient(const F& f, const Vec& q, double h) {
  Vec g(q.size());
  Vec qp = q;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    qp[i] = q[i] + h;
    double fp = f(qp);
    qp[i] = q[i] - h;
    double fm = f(qp);
    qp[i] = q[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Shared scaffold for the manipulability terms: scalar by callable, gradient
// by central differences, Hessian by differencing the gradient (symmetrized,
// eigenvalues floored at zero).
template <typename F>
CostEvaluation fd_cost(const F& f, const Vec& q) {
  CostEvaluation out = CostEvaluation::zero(static_cast<int>(q.size()));
  out.value = f(q);
  out.grad = fd_gradient(f, q, kFdGradStep);
  Mat h(q.size(), q.size());
  Vec qp = q;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    qp[i] = q[i] + kFdHessStep;
    Vec gp = fd_gradient(f, qp, kFdGradStep);
    qp[i] = q[i] - kFdHessStep;
    Vec gm = fd_gradient(f, qp, kFdGradStep);
    qp[i] = q[i];
    h.col(i) = (gp - gm) / (2.0 * kFdHessStep);
  }
  out.hess = psd_floor(0.5 * (h + h.transpose()));
  return out;
}

// Derivative of the sphere log e(v) = g(c) (v - c b) at base b, c = b . v:
// de/dv = g'(c) (v - c b) b^T + g(c) (I - b b^T).
struct SphereLogDiff {
  Vec e;
  Mat de_dv;
};

SphereLogDiff sphere_log_with_diff(const Vec& b, const Vec& v) {
  double c = std::clamp(b.dot(v), -1.0, 1.0);
  if (c < -1.0 + 1e-12)
    throw GeometryError("direction residual undefined for antipodal directions");
  double g, gp;
  if (c > 1.0 - 1e-9) {
    g = 1.0 + (1.0 - c) / 3.0;
    gp = -1.0 / 3.0;
  } else {
    double s2 = 1.0 - c * c;
    double d = std::acos(c);
    g = d / std::sqrt(s2);
    gp = -1.0 / s2 + c * d / (s2 * std::sqrt(s2));
  }
  Vec perp = v - c * b;
  SphereLogDiff out;
  out.e = g * perp;
  out.de_dv = gp * perp * b.transpose() +
              g * (Mat::Identity(b.size(), b.size()) - b * b.transpose());
  return out;
}

double manip_directional_value(const KinematicChain& chain, const Vec& q, const Vec& n,
                               double weight, bool* capped) {
  auto ell = velocity_manipulability(chain, q, true);
  double t = n.dot(ell.m * n);
  if (t < kSingularEps) {
    if (capped) *capped = true;
    t = kSingularEps;
  }
  return weight / t;
}

double manip_determinant_value(const KinematicChain& chain, const Vec& q, double weight,
                               bool* capped) {
  auto ell = velocity_manipulability(chain, q, true);
  double det = ell.m.determinant();
  if (det < kSingularEps) {
    if (capped) *capped = true;
    det = kSingularEps;
  }
  return weight / (det * det);
}

double manip_tracking_value(const KinematicChain& chain, const Vec& q, const Mat& whitener,
                            double weight, bool* regularized) {
  auto ell = velocity_manipulability(chain, q, true);
  auto lg = spd_log(whitener * ell.m * whitener);
  if (regularized && lg.regularized) *regularized = true;
  return weight * lg.value.squaredNorm();
}

}  // namespace

const char* cost_kind_name(CostKind kind) {
  switch (kind) {
    case CostKind::Orientation: return "orientation";
    case CostKind::Position: return "position";
    case CostKind::Direction: return "direction";
    case CostKind::JointLimit: return "joint_limit";
    case CostKind::ManipDirectional: return "manip_directional";
    case CostKind::ManipDeterminant: return "manip_determinant";
    case CostKind::ManipTracking: return "manip_tracking";
  }
  return "unknown";
}

CostEvaluation CostEvaluation::zero(int dof) {
  CostEvaluation e;
  e.grad = Vec::Zero(dof);
  e.hess = Mat::Zero(dof, dof);
  return e;
}

CostEvaluation& CostEvaluation::operator+=(const CostEvaluation& other) {
  value += other.value;
  grad += other.grad;
  hess += other.hess;
  singular_capped = singular_capped || other.singular_capped;
  spd_regularized = spd_regularized || other.spd_regularized;
  return *this;
}

CostEvaluation cost_orientation(const KinematicChain& chain, const Vec& q,
                                const Vec& handle_axis, double weight) {
  check_unit_axis(handle_axis, "handle_axis");
  if (handle_axis.size() != chain.workspace_dim())
    throw DimensionError("handle_axis dimension mismatch");
  Pose grip = chain.gripper_pose(q);
  Vec3 grasp = embed3(Vec(grip.rotation.col(1)));
  Vec3 a = embed3(handle_axis);
  Mat jang = chain.full_jacobian(q).bottomRows(3);
  double e = grasp.dot(a);
  Vec je(chain.dof());
  for (int j = 0; j < chain.dof(); ++j)
    je[j] = Vec3(jang.col(j)).cross(grasp).dot(a);
  CostEvaluation out = CostEvaluation::zero(chain.dof());
  out.value = weight * e * e;
  out.grad = 2.0 * weight * e * je;
  out.hess = 2.0 * weight * je * je.transpose();
  return out;
}

CostEvaluation cost_position(const KinematicChain& chain, const Vec& q,
                             const Vec& target, double weight) {
  if (target.size() != chain.workspace_dim())
    throw DimensionError("position target dimension mismatch");
  Vec e = chain.forward_kinematics(q).position - target;
  Mat j = chain.position_jacobian(q);
  CostEvaluation out = CostEvaluation::zero(chain.dof());
  out.value = weight * e.squaredNorm();
  out.grad = 2.0 * weight * j.transpose() * e;
  out.hess = 2.0 * weight * j.transpose() * j;
  return out;
}

CostEvaluation cost_direction(const KinematicChain& chain, const Vec& q,
                              const Vec& local_axis, const Vec& target_dir,
                              double weight) {
  check_unit_axis(local_axis, "local_axis");
  check_unit_axis(target_dir, "target_dir");
  const int w = chain.workspace_dim();
  if (local_axis.size() != w || target_dir.size() != w)
    throw DimensionError("direction axis dimension mismatch");
  Vec v = chain.forward_kinematics(q).rotation * local_axis;
  auto diff = sphere_log_with_diff(target_dir, v);
  // dv/dq_j is the angular column crossed with v (planar chains embed in 3D).
  Vec3 v3 = embed3(v);
  Mat jang = chain.full_jacobian(q).bottomRows(3);
  Mat jv(w, chain.dof());
  for (int j = 0; j < chain.dof(); ++j)
    jv.col(j) = Vec3(jang.col(j)).cross(v3).head(w);
  Mat je = diff.de_dv * jv;
  CostEvaluation out = CostEvaluation::zero(chain.dof());
  out.value = weight * diff.e.squaredNorm();
  out.grad = 2.0 * weight * je.transpose() * diff.e;
  out.hess = 2.0 * weight * je.transpose() * je;
  return out;
}

CostEvaluation cost_joint_limits(const KinematicChain& chain, const Vec& q, double weight) {
  if (q.size() != chain.dof()) throw DimensionError("q size mismatch");
  CostEvaluation out = CostEvaluation::zero(chain.dof());
  for (int i = 0; i < chain.dof(); ++i) {
    double lo = chain.q_lower()[i], hi = chain.q_upper()[i];
    double d = 0.0;
    if (q[i] < lo) d = q[i] - lo;
    else if (q[i] > hi) d = q[i] - hi;
    if (d != 0.0) {
      out.value += weight * d * d;
      out.grad[i] = 2.0 * weight * d;
      out.hess(i, i) = 2.0 * weight;
    }
  }
  return out;
}

CostEvaluation cost_manip_directional(const KinematicChain& chain, const Vec& q,
                                      const Vec& n, double weight) {
  check_unit_axis(n, "n");
  if (n.size() != chain.workspace_dim()) throw DimensionError("n dimension mismatch");
  bool capped = false;
  auto f = [&](const Vec& qq) { return manip_directional_value(chain, qq, n, weight, nullptr); };
  CostEvaluation out = fd_cost(f, q);
  out.value = manip_directional_value(chain, q, n, weight, &capped);
  out.singular_capped = capped;
  return out;
}

CostEvaluation cost_manip_determinant(const KinematicChain& chain, const Vec& q,
                                      double weight) {
  bool capped = false;
  auto f = [&](const Vec& qq) { return manip_determinant_value(chain, qq, weight, nullptr); };
  CostEvaluation out = fd_cost(f, q);
  out.value = manip_determinant_value(chain, q, weight, &capped);
  out.singular_capped = capped;
  return out;
}

CostEvaluation cost_manip_tracking(const KinematicChain& chain, const Vec& q,
                                   const Mat& desired, double weight) {
  if (desired.rows() != chain.workspace_dim() || desired.cols() != chain.workspace_dim())
    throw DimensionError("desired ellipsoid dimension mismatch");
  Mat whitener = spd_inv_sqrt(desired);
  bool reg = false;
  auto f = [&](const Vec& qq) {
    return manip_tracking_value(chain, qq, whitener, weight, nullptr);
  };
  CostEvaluation out = fd_cost(f, q);
  out.value = manip_tracking_value(chain, q, whitener, weight, &reg);
  out.spd_regularized = reg;
  return out;
}

double cost_term_value(const CostTerm& term, const KinematicChain& chain, const Vec& q) {
  switch (term.kind) {
    case CostKind::Orientation: {
      Pose grip = chain.gripper_pose(q);
      double e = embed3(Vec(grip.rotation.col(1))).dot(embed3(term.axis));
      return term.weight * e * e;
    }
    case CostKind::Position:
      return term.weight * (chain.forward_kinematics(q).position - term.target).squaredNorm();
    case CostKind::Direction: {
      Vec v = chain.forward_kinematics(q).rotation * term.local_axis;
      double d = sphere_distance(term.axis, v);
      return term.weight * d * d;
    }
    case CostKind::JointLimit: {
      double s = 0.0;
      for (int i = 0; i < chain.dof(); ++i) {
        double lo = chain.q_lower()[i], hi = chain.q_upper()[i];
        double d = q[i] < lo ? q[i] - lo : (q[i] > hi ? q[i] - hi : 0.0);
        s += d * d;
      }
      return term.weight * s;
    }
    case CostKind::ManipDirectional:
      return manip_directional_value(chain, q, term.axis, term.weight, nullptr);
    case CostKind::ManipDeterminant:
      return manip_determinant_value(chain, q, term.weight, nullptr);
    case CostKind::ManipTracking:
      return manip_tracking_value(chain, q, spd_inv_sqrt(term.desired), term.weight, nullptr);
  }
  throw Error("unknown cost kind");
}

CostEvaluation evaluate_term(const CostTerm& term, const CostContext& ctx,
                             const Vec& q, int t) {
  if (!term.schedule.active(t))
    return CostEvaluation::zero(ctx.arm->dof());
  const KinematicChain& chain = ctx.chain_for(term);
  switch (term.kind) {
    case CostKind::Orientation:
      return cost_orientation(*ctx.arm, q, term.axis, term.weight);
    case CostKind::Position:
      return cost_position(chain, q, term.target, term.weight);
    case CostKind::Direction:
      return cost_direction(chain, q, term.local_axis, term.axis, term.weight);
    case CostKind::JointLimit:
      return cost_joint_limits(*ctx.arm, q, term.weight);
    case CostKind::ManipDirectional:
      return cost_manip_directional(chain, q, term.axis, term.weight);
    case CostKind::ManipDeterminant:
      return cost_manip_determinant(chain, q, term.weight);
    case CostKind::ManipTracking:
      return cost_manip_tracking(chain, q, term.desired, term.weight);
  }
  throw Error("unknown cost kind");
}

CostEvaluation stage_cost(const std::vector<CostTerm>& terms, const CostContext& ctx,
                          const Vec& q, int t) {
  CostEvaluation total = CostEvaluation::zero(ctx.arm->dof());
  for (const auto& term : terms)
    if (term.schedule.active(t)) total += evaluate_term(term, ctx, q, t);
  return total;
}

Mat make_desired_ellipsoid(const Vec& direction, double major, double minor) {
  check_unit_axis(direction, "direction");
  require(major > 0.0 && minor > 0.0, "ellipsoid axes must be positive");
  const auto w = direction.size();
  return (major * major - minor * minor) * direction * direction.transpose() +
         minor * minor * Mat::Identity(w, w);
}

Mat psd_floor(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(h);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
         eig.eigenvectors().transpose();
}

}  // namespace tacopt
