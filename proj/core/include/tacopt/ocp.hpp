#pragma once

#include <functional>
#include <vector>

#include "tacopt/chain.hpp"
#include "tacopt/costs.hpp"
#include "tacopt/types.hpp"

namespace tacopt {

// Joint-velocity-controlled trajectory: q_{t+1} = q_t + u_t dt, with the
// gripper position p_t = f(q_t) carried along as part of the state.
// Columns are timesteps: q, p have T+1 of them, u has T.
struct Trajectory {
  Mat q;
  Mat p;
  Mat u;
  double dt = 0.0;

  int horizon() const { return static_cast<int>(u.cols()); }
  int dof() const { return static_cast<int>(q.rows()); }
  int workspace_dim() const { return static_cast<int>(p.rows()); }

  // States t = 1..T as [q_t; p_t] blocks; controls t = 0..T-1.
  Vec stacked_state() const;
  Vec stacked_control() const;
};

Trajectory rollout(const KinematicChain& arm, const Vec& q0, const Mat& controls, double dt);
Trajectory rollout_stacked(const KinematicChain& arm, const Vec& q0, const Vec& controls,
                           double dt);

// Linearization of the rollout map around a nominal trajectory. The dynamics
// collapse so that the stacked sensitivity has block (t, s) = [I; J_t] dt for
// every control s < t, which the solver exploits; dense forms are materialized
// on demand for verification.
struct LinearizedSystem {
  std::vector<Mat> jac;  // J(q_t), t = 1..T (bare-arm positional Jacobian)
  int dof = 0;
  int wdim = 0;
  double dt = 0.0;

  int horizon() const { return static_cast<int>(jac.size()); }
  int state_dim() const { return dof + wdim; }

  Mat a(int t) const;  // d x_{t+1} / d x_t, uses J_{t+1}
  Mat b(int t) const;  // d x_{t+1} / d u_t

  Mat dense_su() const;          // (dof+wdim)T x dof*T
  Vec apply_su(const Vec& du) const;
  Vec apply_su_transpose(const Vec& vx) const;
};

LinearizedSystem linearize(const KinematicChain& arm, const Trajectory& traj);

// Quadratic expansion of the task cost along a nominal trajectory. All terms
// differentiate through q, so blocks live in the q part of the state.
struct CostExpansion {
  std::vector<Vec> grad_q;  // T entries (t = 1..T)
  std::vector<Mat> hess_q;  // T entries; empty matrix when inactive
  std::vector<bool> active; // whether hess_q[t] has any content
  double value = 0.0;       // task cost summed over t = 1..T
  bool singular_capped = false;
  bool spd_regularized = false;
};

CostExpansion expand_costs(const std::vector<CostTerm>& terms, const CostContext& ctx,
                           const Trajectory& traj);

struct IlqrOptions {
  // Consensus penalty on constrained state blocks (zero entries elsewhere, so
  // free states are never dragged toward stale consensus copies); the solver
  // folds it into the cost expansion at the constrained timesteps.
  double q_r = 10.0;
  double r_r = 1e-3;        // consensus/proximal weight on controls
  double r_control = 1e-5;  // quadratic control effort weight
  // Keep the R*u term of the stationarity condition. Disabling reproduces the
  // update without the control offset (the reference-point form); with the
  // tiny control weights the two differ negligibly, and a toggle keeps both
  // testable.
  bool exact_control_offset = true;
};

/// One regularized step: minimizes the local quadratic model of
//   c(x) + u^T R u + ||u - u_r||^2_{R_r}
// over du with x = x_hat + S_u du, u = u_hat + du; du_r = u_r - u_hat is the
// stacked control deviation. State-side consensus penalties enter through the
// cost expansion (exact for p-block quadratics, since p is linear in the
// batch model).
Vec ilqr_step(const LinearizedSystem& lin, const CostExpansion& ex, const Vec& du_r,
              const Vec& u_hat, const IlqrOptions& opt);

struct LineSearchResult {
  Trajectory traj;
  double cost = 0.0;
  double alpha = 0.0;
  bool no_progress = false;
};

// Backtracking search over u_hat + alpha*du: halve alpha from 1 while the
// candidate cost exceeds the current one; accept on <=; give up below
// alpha_min and keep the current point (alpha = 0, no_progress).
LineSearchResult line_search(const std::function<Trajectory(const Vec&)>& roll,
                             const std::function<double(const Trajectory&)>& cost_fn,
                             const Trajectory& current, double current_cost,
                             const Vec& u_hat, const Vec& du, double alpha_min);

// --- Generic batch linear-quadratic pieces (verification and tests) --------

// Stacked maps for arbitrary time-varying linear dynamics
// x_{t+1} = A_t x_t + B_t u_t: x_t = S_x(t) x_0 + sum_s S_u(t, s) u_s,
// states stacked over t = 1..T.
struct StackedDynamics {
  Mat s_x;  // (n*T) x n
  Mat s_u;  // (n*T) x (m*T)
};
StackedDynamics stack_dynamics(const std::vector<Mat>& a, const std::vector<Mat>& b);

// Minimizer of ||x - x_d||^2_Q + ||u||^2_R over the stacked trajectory:
// u = (S_u^T Q S_u + R)^{-1} S_u^T Q (x_d - S_x x_0).
Vec batch_lqr(const std::vector<Mat>& a, const std::vector<Mat>& b, const Mat& q,
              const Mat& r, const Vec& x0, const Vec& x_d);

}  // namespace tacopt
