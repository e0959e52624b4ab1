#include "tacopt/admm.hpp"

#include <chrono>
#include <cmath>

#include "tacopt/geometry.hpp"

namespace tacopt {

bool OrientedBox::contains(const Vec& point, double tol) const {
  Vec local = rotation.transpose() * (point - center);
  return ((local.cwiseAbs() - half_extents).array() <= tol).all();
}

double OrientedBox::distance(const Vec& point) const {
  return (project_oriented_box(point, *this) - point).norm();
}

Vec project_box(const Vec& v, const Vec& lower, const Vec& upper) {
  if (v.size() != lower.size() || v.size() != upper.size())
    throw DimensionError("box bound size mismatch");
  return v.cwiseMax(lower).cwiseMin(upper);
}

Vec project_affine_band(const Vec& x, const Vec& a, double lower, double upper) {
  require(lower <= upper, "affine band needs lower <= upper");
  double nrm2 = a.squaredNorm();
  require(nrm2 > 0.0, "affine band normal must be nonzero");
  double v = a.dot(x);
  if (v > upper) return x - ((v - upper) / nrm2) * a;
  if (v < lower) return x - ((v - lower) / nrm2) * a;
  return x;
}

Vec project_oriented_box(const Vec& point, const OrientedBox& box) {
  if (point.size() != box.center.size()) throw DimensionError("point/box size mismatch");
  Vec local = box.rotation.transpose() * (point - box.center);
  local = local.cwiseMax(-box.half_extents).cwiseMin(box.half_extents);
  return box.center + box.rotation * local;
}

ConsensusState z_update(const Vec& x_hat, const Vec& u_hat, const ConsensusState& prev,
                        const ConstraintSet& constraints, int dof, int wdim) {
  ConsensusState next = prev;
  const int m = dof + wdim;
  Vec zx = x_hat + prev.lambda_x;
  Vec zu = u_hat + prev.lambda_u;

  if (constraints.u_lower.size() > 0) {
    if (constraints.u_lower.size() != dof || constraints.u_upper.size() != dof)
      throw DimensionError("control bound size mismatch");
    const int t_end = static_cast<int>(zu.size()) / dof;
    for (int t = 0; t < t_end; ++t)
      zu.segment(t * dof, dof) =
          project_box(zu.segment(t * dof, dof), constraints.u_lower, constraints.u_upper);
  }

  if (constraints.grip_box) {
    for (int t : constraints.grip_box_steps) {
      const int at = (t - 1) * m + dof;
      Vec p = zx.segment(at, wdim);
      p = project_oriented_box(p, *constraints.grip_box);
      for (const auto& band : constraints.extra_bands)
        p = project_affine_band(p, band.a, band.lower, band.upper);
      zx.segment(at, wdim) = p;
    }
  }

  next.z_x = std::move(zx);
  next.z_u = std::move(zu);
  return next;
}

Vec dual_update(const Vec& lambda, const Vec& hat, const Vec& z) {
  return lambda + hat - z;
}

std::pair<double, double> residuals(const Vec& x_hat, const Vec& u_hat,
                                    const ConsensusState& current, const Vec& z_x_prev,
                                    const Vec& z_u_prev) {
  double primal = (u_hat - current.z_u).squaredNorm() + (x_hat - current.z_x).squaredNorm();
  double dual =
      (z_x_prev - current.z_x).squaredNorm() + (z_u_prev - current.z_u).squaredNorm();
  return {primal, dual};
}

Pose tool_head_pose(const ToolSpec& tool) {
  const auto w = tool.head_position.size();
  if (tool.head_axis.size() != w) throw DimensionError("tool axis/position size mismatch");
  if (std::abs(tool.head_axis.norm() - 1.0) > kUnitTol)
    throw GeometryError("tool head axis must be unit length");
  Pose pose;
  pose.position = tool.head_position;
  if (w == 2) {
    pose.rotation = Mat(2, 2);
    pose.rotation.col(0) = tool.head_axis;
    pose.rotation.col(1) = Vec2(-tool.head_axis[1], tool.head_axis[0]);
  } else if (w == 3) {
    Vec3 x = Vec3(tool.head_axis);
    Vec3 ref = std::abs(x.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitY();
    Vec3 y = ref.cross(x).normalized();
    pose.rotation = Mat(3, 3);
    pose.rotation.col(0) = x;
    pose.rotation.col(1) = y;
    pose.rotation.col(2) = x.cross(y);
  } else {
    throw DimensionError("tool pose must be 2D or 3D");
  }
  return pose;
}

namespace {

void validate_problem(const Problem& pb) {
  const int d = pb.arm.dof();
  const int w = pb.arm.workspace_dim();
  if (pb.q0.size() != d) throw DimensionError("q0 size does not match dof");
  if (!pb.q0.allFinite()) throw NumericalError("q0 contains non-finite values");
  require(pb.horizon >= 1, "horizon must be at least 1");
  require(pb.dt > 0.0, "dt must be positive");
  require(pb.grasp_step >= 1 && pb.grasp_step <= pb.horizon,
          "grasp step must lie inside the horizon");
  if (pb.constraints.u_lower.size() > 0) {
    if (pb.constraints.u_lower.size() != d || pb.constraints.u_upper.size() != d)
      throw DimensionError("control bound size mismatch");
    require((pb.constraints.u_lower.array() <= pb.constraints.u_upper.array()).all(),
            "control bounds must satisfy lower <= upper");
  }
  if (pb.constraints.grip_box) {
    const auto& box = *pb.constraints.grip_box;
    if (box.center.size() != w || box.half_extents.size() != w ||
        box.rotation.rows() != w || box.rotation.cols() != w)
      throw DimensionError("grip box dimension mismatch");
    require((box.half_extents.array() > 0.0).all(), "box half extents must be positive");
    Mat err = box.rotation.transpose() * box.rotation - Mat::Identity(w, w);
    if (err.cwiseAbs().maxCoeff() > 1e-9)
      throw GeometryError("box rotation is not orthonormal");
    require(!pb.constraints.grip_box_steps.empty(),
            "grip box configured without any active timestep");
    for (int t : pb.constraints.grip_box_steps)
      require(t >= 1 && t <= pb.horizon, "grip box timestep outside horizon");
  }
  if (pb.tool) {
    if (pb.tool->head_position.size() != w)
      throw DimensionError("tool head position dimension mismatch");
    tool_head_pose(*pb.tool);  // validates the axis
  }
}

// Task-cost values (built-in + custom) summed over t = 1..T for a candidate.
double task_cost_value(const Problem& pb, const CostContext& ctx, const Trajectory& traj) {
  double total = 0.0;
  for (int t = 1; t <= traj.horizon(); ++t) {
    for (const auto& term : pb.terms)
      if (term.schedule.active(t))
        total += cost_term_value(term, ctx.chain_for(term), traj.q.col(t));
    for (const auto& fn : pb.custom_terms) total += fn(traj.q.col(t), t).value;
  }
  return total;
}

void add_custom_terms(const Problem& pb, const Trajectory& traj, CostExpansion* ex) {
  if (pb.custom_terms.empty()) return;
  for (int t = 1; t <= traj.horizon(); ++t) {
    const auto k = static_cast<size_t>(t - 1);
    for (const auto& fn : pb.custom_terms) {
      CostEvaluation ev = fn(traj.q.col(t), t);
      ex->value += ev.value;
      ex->grad_q[k] += ev.grad;
      if (ev.hess.size() > 0 && ev.hess.cwiseAbs().maxCoeff() > 0.0) {
        if (ex->active[k]) ex->hess_q[k] += ev.hess;
        else { ex->hess_q[k] = ev.hess; ex->active[k] = true; }
      }
    }
  }
}

}  // namespace

SolveReport solve(const Problem& problem) {
  const auto t_start = std::chrono::steady_clock::now();
  validate_problem(problem);

  const KinematicChain arm = problem.arm.without_tool();
  const int d = arm.dof();
  const int w = arm.workspace_dim();
  const int m = d + w;
  const int t_end = problem.horizon;
  const auto& prm = problem.params;

  Trajectory nominal = rollout(arm, problem.q0, Mat::Zero(d, t_end), problem.dt);
  Vec u_hat = Vec::Zero(d * t_end);

  ConsensusState cs;
  cs.z_x = Vec::Zero(m * t_end);
  cs.z_u = Vec::Zero(d * t_end);
  cs.lambda_x = Vec::Zero(m * t_end);
  cs.lambda_u = Vec::Zero(d * t_end);

  // The state-side consensus penalty q_r applies only where the state is
  // actually constrained: the gripper p block at the grip-box timesteps. Free
  // components carry no penalty, so they are never dragged toward stale
  // consensus copies (their z entries track x_hat exactly after one sweep).
  auto state_proximal = [&](const Trajectory& traj, const Vec& x_ref) {
    if (!problem.constraints.grip_box) return 0.0;
    double total = 0.0;
    for (int tb : problem.constraints.grip_box_steps) {
      const Vec p_ref = x_ref.segment((tb - 1) * m + d, w);
      total += (traj.p.col(tb) - p_ref).squaredNorm();
    }
    return prm.ilqr.q_r * total;
  };

  SolveReport report;
  std::optional<KinematicChain> extended;

  int outer = 0;
  for (; outer < prm.max_outer; ++outer) {
    // Re-anchor the tool to the current nominal grasp pose.
    CostContext ctx{&arm, nullptr, t_end};
    if (problem.tool) {
      Pose grip = arm.gripper_pose(nominal.q.col(problem.grasp_step));
      extended = attach_tool(arm, grip, tool_head_pose(*problem.tool));
      ctx.extended = &*extended;
    }

    const Vec x_r = cs.z_x - cs.lambda_x;
    const Vec u_r = cs.z_u - cs.lambda_u;

    auto roll = [&](const Vec& uu) { return rollout_stacked(arm, problem.q0, uu, problem.dt); };
    auto augmented = [&](const Trajectory& traj) {
      Vec us = traj.stacked_control();
      double c = task_cost_value(problem, ctx, traj);
      c += prm.ilqr.r_control * us.squaredNorm();
      c += state_proximal(traj, x_r);
      c += prm.ilqr.r_r * (us - u_r).squaredNorm();
      return c;
    };

    double current_cost = augmented(nominal);
    for (int inner = 0; inner < prm.max_inner; ++inner) {
      if (current_cost < prm.c_max) break;
      LinearizedSystem lin = linearize(arm, nominal);
      CostExpansion ex = expand_costs(problem.terms, ctx, nominal);
      add_custom_terms(problem, nominal, &ex);
      if (ex.singular_capped) ++report.singular_cap_events;
      if (ex.spd_regularized) ++report.spd_regularize_events;

      // Fold the box-block consensus penalty into the expansion. p is linear
      // in the batch model, so routing the quadratic through the Jacobian is
      // exact, and unconstrained timesteps stay untouched.
      if (problem.constraints.grip_box) {
        for (int tb : problem.constraints.grip_box_steps) {
          const auto k = static_cast<size_t>(tb - 1);
          const Mat& jac = lin.jac[k];
          const Vec p_ref = x_r.segment((tb - 1) * m + d, w);
          const Vec p_err = nominal.p.col(tb) - p_ref;
          ex.grad_q[k] += 2.0 * prm.ilqr.q_r * jac.transpose() * p_err;
          Mat hess = 2.0 * prm.ilqr.q_r * jac.transpose() * jac;
          if (ex.active[k]) ex.hess_q[k] += hess;
          else { ex.hess_q[k] = std::move(hess); ex.active[k] = true; }
        }
      }

      Vec du = ilqr_step(lin, ex, u_r - u_hat, u_hat, prm.ilqr);
      auto ls = line_search(roll, augmented, nominal, current_cost, u_hat, du, prm.alpha_min);

      report.inner_history.push_back({outer, inner, ls.cost, ls.alpha, ls.no_progress});
      if (ls.no_progress) break;
      nominal = std::move(ls.traj);
      u_hat = nominal.stacked_control();
      current_cost = ls.cost;
    }

    const Vec x_hat = nominal.stacked_state();
    Vec z_x_prev = cs.z_x, z_u_prev = cs.z_u;
    cs = z_update(x_hat, u_hat, cs, problem.constraints, d, w);
    cs.lambda_x = dual_update(cs.lambda_x, x_hat, cs.z_x);
    cs.lambda_u = dual_update(cs.lambda_u, u_hat, cs.z_u);

    auto [rp, rd] = residuals(x_hat, u_hat, cs, z_x_prev, z_u_prev);
    report.residual_history.push_back({outer, rp, rd});
    report.primal_residual = rp;
    report.dual_residual = rd;
    if (rp <= prm.primal_tol && rd <= prm.dual_tol) {
      ++outer;
      report.converged = true;
      break;
    }
  }
  report.outer_iterations = std::min(outer, prm.max_outer);

  // Final diagnostics against the nominal trajectory, with the tool re-anchored.
  CostContext ctx{&arm, nullptr, t_end};
  if (problem.tool) {
    Pose grip = arm.gripper_pose(nominal.q.col(problem.grasp_step));
    extended = attach_tool(arm, grip, tool_head_pose(*problem.tool));
    ctx.extended = &*extended;
  }

  report.task_cost = task_cost_value(problem, ctx, nominal);
  const Vec x_r = cs.z_x - cs.lambda_x;
  const Vec u_r = cs.z_u - cs.lambda_u;
  report.augmented_cost = report.task_cost + prm.ilqr.r_control * u_hat.squaredNorm() +
                          state_proximal(nominal, x_r) +
                          prm.ilqr.r_r * (u_hat - u_r).squaredNorm();

  for (const auto& term : problem.terms) {
    double v = 0.0;
    for (int t = 1; t <= t_end; ++t)
      if (term.schedule.active(t))
        v += cost_term_value(term, ctx.chain_for(term), nominal.q.col(t));
    report.cost_breakdown[cost_kind_name(term.kind)] += v;
  }
  report.cost_breakdown["control"] = prm.ilqr.r_control * u_hat.squaredNorm();
  if (!problem.custom_terms.empty()) {
    double v = 0.0;
    for (int t = 1; t <= t_end; ++t)
      for (const auto& fn : problem.custom_terms) v += fn(nominal.q.col(t), t).value;
    report.cost_breakdown["custom"] = v;
  }

  if (problem.constraints.grip_box) {
    report.grip_box_feasible_consensus = true;
    double worst = 0.0;
    for (int t : problem.constraints.grip_box_steps) {
      const int at = (t - 1) * m + d;
      if (!problem.constraints.grip_box->contains(cs.z_x.segment(at, w), 1e-9))
        report.grip_box_feasible_consensus = false;
      worst = std::max(worst, problem.constraints.grip_box->distance(
                                  Vec(nominal.p.col(t))));
    }
    report.grip_box_violation_nominal = worst;
  }

  if (problem.constraints.u_lower.size() > 0) {
    double worst = 0.0;
    for (int t = 0; t < t_end; ++t) {
      Vec over = (nominal.u.col(t) - problem.constraints.u_upper).cwiseMax(0.0);
      Vec under = (problem.constraints.u_lower - nominal.u.col(t)).cwiseMax(0.0);
      worst = std::max({worst, over.maxCoeff(), under.maxCoeff()});
    }
    report.control_violation = worst;
    report.controls_within_bounds = worst <= 1e-9;
  } else {
    report.controls_within_bounds = true;
  }

  const KinematicChain& effective = extended ? *extended : arm;
  ManipDiagnostics manip;
  manip.ellipsoid = velocity_manipulability(effective, nominal.q.col(t_end), true);
  manip.index = manipulability_index(manip.ellipsoid.m);
  Vec probe;
  for (const auto& term : problem.terms)
    if (term.kind == CostKind::ManipDirectional) probe = term.axis;
  if (probe.size() == 0 && problem.manip_direction) probe = *problem.manip_direction;
  if (probe.size() > 0) {
    manip.has_direction = true;
    manip.transmission = directional_transmission(manip.ellipsoid.m, probe);
    auto proxy = impact_velocity_proxy(effective, nominal.q.col(t_end), probe);
    manip.impact_proxy = proxy.value;
    manip.proxy_used_bare_chain = proxy.used_bare_chain;
  }
  report.manip = manip;

  report.trajectory = std::move(nominal);
  report.z_x = cs.z_x;
  report.z_u = cs.z_u;
  report.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

}  // namespace tacopt
