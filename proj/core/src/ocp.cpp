#include "tacopt/ocp.hpp"

#include <cmath>

namespace tacopt {

Vec Trajectory::stacked_state() const {
  const int t_end = horizon();
  const int m = dof() + workspace_dim();
  Vec out(m * t_end);
  for (int t = 1; t <= t_end; ++t) {
    out.segment((t - 1) * m, dof()) = q.col(t);
    out.segment((t - 1) * m + dof(), workspace_dim()) = p.col(t);
  }
  return out;
}

Vec Trajectory::stacked_control() const {
  Vec out(u.size());
  for (int t = 0; t < horizon(); ++t) out.segment(t * dof(), dof()) = u.col(t);
  return out;
}

Trajectory rollout(const KinematicChain& arm, const Vec& q0, const Mat& controls,
                   double dt) {
  if (q0.size() != arm.dof()) throw DimensionError("q0 size mismatch");
  if (controls.rows() != arm.dof()) throw DimensionError("controls row mismatch");
  if (!controls.allFinite()) throw NumericalError("controls contain non-finite values");
  require(dt > 0.0, "dt must be positive");
  const int t_end = static_cast<int>(controls.cols());
  Trajectory traj;
  traj.dt = dt;
  traj.q.resize(arm.dof(), t_end + 1);
  traj.p.resize(arm.workspace_dim(), t_end + 1);
  traj.u = controls;
  traj.q.col(0) = q0;
  traj.p.col(0) = arm.gripper_pose(q0).position;
  for (int t = 0; t < t_end; ++t) {
    traj.q.col(t + 1) = traj.q.col(t) + controls.col(t) * dt;
    traj.p.col(t + 1) = arm.gripper_pose(traj.q.col(t + 1)).position;
  }
  return traj;
}

Trajectory rollout_stacked(const KinematicChain& arm, const Vec& q0, const Vec& controls,
                           double dt) {
  if (controls.size() % arm.dof() != 0)
    throw DimensionError("stacked controls not a multiple of dof");
  const int t_end = static_cast<int>(controls.size()) / arm.dof();
  Mat u(arm.dof(), t_end);
  for (int t = 0; t < t_end; ++t) u.col(t) = controls.segment(t * arm.dof(), arm.dof());
  return rollout(arm, q0, u, dt);
}

Mat LinearizedSystem::a(int t) const {
  const int m = state_dim();
  Mat out = Mat::Zero(m, m);
  out.topLeftCorner(dof, dof).setIdentity();
  out.block(dof, 0, wdim, dof) = jac[static_cast<size_t>(t + 1) - 1];
  return out;
}

Mat LinearizedSystem::b(int t) const {
  const int m = state_dim();
  Mat out(m, dof);
  out.topRows(dof) = Mat::Identity(dof, dof) * dt;
  out.bottomRows(wdim) = jac[static_cast<size_t>(t + 1) - 1] * dt;
  return out;
}

Mat LinearizedSystem::dense_su() const {
  const int t_end = horizon();
  const int m = state_dim();
  Mat su = Mat::Zero(m * t_end, dof * t_end);
  for (int t = 1; t <= t_end; ++t) {
    Mat c(m, dof);
    c.topRows(dof) = Mat::Identity(dof, dof) * dt;
    c.bottomRows(wdim) = jac[static_cast<size_t>(t - 1)] * dt;
    for (int s = 0; s < t; ++s) su.block((t - 1) * m, s * dof, m, dof) = c;
  }
  return su;
}

Vec LinearizedSystem::apply_su(const Vec& du) const {
  const int t_end = horizon();
  const int m = state_dim();
  if (du.size() != dof * t_end) throw DimensionError("du size mismatch");
  Vec out(m * t_end);
  Vec acc = Vec::Zero(dof);  // running sum of du_s, s < t
  for (int t = 1; t <= t_end; ++t) {
    acc += du.segment((t - 1) * dof, dof);
    out.segment((t - 1) * m, dof) = acc * dt;
    out.segment((t - 1) * m + dof, wdim) = jac[static_cast<size_t>(t - 1)] * acc * dt;
  }
  return out;
}

Vec LinearizedSystem::apply_su_transpose(const Vec& vx) const {
  const int t_end = horizon();
  const int m = state_dim();
  if (vx.size() != m * t_end) throw DimensionError("vx size mismatch");
  Vec out(dof * t_end);
  Vec acc = Vec::Zero(dof);  // running suffix sum of C_t^T v_t, t > s
  for (int s = t_end - 1; s >= 0; --s) {
    const int t = s + 1;
    acc += vx.segment((t - 1) * m, dof) +
           jac[static_cast<size_t>(t - 1)].transpose() * vx.segment((t - 1) * m + dof, wdim);
    out.segment(s * dof, dof) = acc * dt;
  }
  return out;
}

LinearizedSystem linearize(const KinematicChain& arm, const Trajectory& traj) {
  LinearizedSystem lin;
  lin.dof = arm.dof();
  lin.wdim = arm.workspace_dim();
  lin.dt = traj.dt;
  lin.jac.reserve(static_cast<size_t>(traj.horizon()));
  for (int t = 1; t <= traj.horizon(); ++t)
    lin.jac.push_back(arm.gripper_position_jacobian(traj.q.col(t)));
  return lin;
}

CostExpansion expand_costs(const std::vector<CostTerm>& terms, const CostContext& ctx,
                           const Trajectory& traj) {
  const int t_end = traj.horizon();
  CostExpansion ex;
  ex.grad_q.resize(static_cast<size_t>(t_end));
  ex.hess_q.resize(static_cast<size_t>(t_end));
  ex.active.assign(static_cast<size_t>(t_end), false);
  for (int t = 1; t <= t_end; ++t) {
    bool any = false;
    for (const auto& term : terms)
      if (term.schedule.active(t)) { any = true; break; }
    const auto k = static_cast<size_t>(t - 1);
    if (!any) {
      ex.grad_q[k] = Vec::Zero(traj.dof());
      continue;
    }
    CostEvaluation ev = stage_cost(terms, ctx, traj.q.col(t), t);
    ex.grad_q[k] = ev.grad;
    if (ev.hess.cwiseAbs().maxCoeff() > 0.0) {
      ex.hess_q[k] = ev.hess;
      ex.active[k] = true;
    }
    ex.value += ev.value;
    ex.singular_capped = ex.singular_capped || ev.singular_capped;
    ex.spd_regularized = ex.spd_regularized || ev.spd_regularized;
  }
  return ex;
}

Vec ilqr_step(const LinearizedSystem& lin, const CostExpansion& ex, const Vec& du_r,
              const Vec& u_hat, const IlqrOptions& opt) {
  const int t_end = lin.horizon();
  const int d = lin.dof;
  const int n = d * t_end;
  if (du_r.size() != n || u_hat.size() != n) throw DimensionError("du size mismatch");

  // Per-step D x D contributions M_t = C_t^T (H_t/2) C_t; all stage curvature
  // (task terms and any consensus penalty on constrained state blocks) arrives
  // in the q block of the expansion, already mapped through the Jacobian. The
  // per-step right-hand vectors are C_t^T v_t with v_t = -g_t/2.
  std::vector<Mat> m_t(static_cast<size_t>(t_end));
  Mat rhs_cols(d, t_end);
  for (int t = 1; t <= t_end; ++t) {
    const auto k = static_cast<size_t>(t - 1);
    m_t[k] = ex.active[k] ? Mat(0.5 * ex.hess_q[k]) : Mat(Mat::Zero(d, d));
    rhs_cols.col(t - 1) = -0.5 * ex.grad_q[k];
  }

  // Suffix sums give the normal matrix blocks: N(s, s') = dt^2 G_{max(s,s')+1}.
  std::vector<Mat> suffix(static_cast<size_t>(t_end + 1));
  suffix[static_cast<size_t>(t_end)] = Mat::Zero(d, d);
  for (int t = t_end; t >= 1; --t)
    suffix[static_cast<size_t>(t - 1)] = suffix[static_cast<size_t>(t)] + m_t[static_cast<size_t>(t - 1)];

  const double dt2 = lin.dt * lin.dt;
  Mat normal(n, n);
  for (int s = 0; s < t_end; ++s) {
    for (int sp = s; sp < t_end; ++sp) {
      Mat blockv = dt2 * suffix[static_cast<size_t>(sp)];
      normal.block(s * d, sp * d, d, d) = blockv;
      if (sp != s) normal.block(sp * d, s * d, d, d) = blockv.transpose();
    }
  }
  normal.diagonal().array() += opt.r_control + opt.r_r;

  Vec rhs(n);
  Vec acc = Vec::Zero(d);
  for (int s = t_end - 1; s >= 0; --s) {
    acc += rhs_cols.col(s);
    rhs.segment(s * d, d) = acc * lin.dt;
  }
  rhs += opt.r_r * du_r;
  if (opt.exact_control_offset) rhs -= opt.r_control * u_hat;

  Eigen::LDLT<Mat> ldlt(normal);
  if (ldlt.info() != Eigen::Success) throw NumericalError("normal matrix factorization failed");
  return ldlt.solve(rhs);
}

LineSearchResult line_search(const std::function<Trajectory(const Vec&)>& roll,
                             const std::function<double(const Trajectory&)>& cost_fn,
                             const Trajectory& current, double current_cost,
                             const Vec& u_hat, const Vec& du, double alpha_min) {
  double alpha = 1.0;
  while (true) {
    Trajectory cand = roll(u_hat + alpha * du);
    double c = cost_fn(cand);
    if (c <= current_cost)
      return LineSearchResult{std::move(cand), c, alpha, false};
    if (alpha <= alpha_min) break;
    alpha *= 0.5;
  }
  return LineSearchResult{current, current_cost, 0.0, true};
}

StackedDynamics stack_dynamics(const std::vector<Mat>& a, const std::vector<Mat>& b) {
  require(!a.empty() && a.size() == b.size(), "need matching nonempty A, B lists");
  const int n = static_cast<int>(a[0].rows());
  const int m = static_cast<int>(b[0].cols());
  const int t_end = static_cast<int>(a.size());
  StackedDynamics out;
  out.s_x = Mat::Zero(n * t_end, n);
  out.s_u = Mat::Zero(n * t_end, m * t_end);
  Mat phi = Mat::Identity(n, n);  // A_{t-1} ... A_0 accumulated row by row
  for (int t = 1; t <= t_end; ++t) {
    const auto k = static_cast<size_t>(t - 1);
    phi = a[k] * phi;
    out.s_x.middleRows((t - 1) * n, n) = phi;
    // S_u(t, s) = A_{t-1} ... A_{s+1} B_s; build by propagating row t-1.
    if (t > 1)
      out.s_u.block((t - 1) * n, 0, n, m * (t - 1)) =
          a[k] * out.s_u.block((t - 2) * n, 0, n, m * (t - 1));
    out.s_u.block((t - 1) * n, (t - 1) * m, n, m) = b[k];
  }
  return out;
}

Vec batch_lqr(const std::vector<Mat>& a, const std::vector<Mat>& b, const Mat& q,
              const Mat& r, const Vec& x0, const Vec& x_d) {
  auto stacked = stack_dynamics(a, b);
  if (q.rows() != stacked.s_u.rows()) throw DimensionError("Q size mismatch");
  if (r.rows() != stacked.s_u.cols()) throw DimensionError("R size mismatch");
  if (x_d.size() != stacked.s_u.rows() || x0.size() != stacked.s_x.cols())
    throw DimensionError("state vector size mismatch");
  Mat n = stacked.s_u.transpose() * q * stacked.s_u + r;
  Vec rhs = stacked.s_u.transpose() * q * (x_d - stacked.s_x * x0);
  Eigen::LDLT<Mat> ldlt(n);
  if (ldlt.info() != Eigen::Success) throw NumericalError("batch LQR factorization failed");
  return ldlt.solve(rhs);
}

}  // namespace tacopt
