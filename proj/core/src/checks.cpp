#include "tacopt/checks.hpp"

#include <cmath>
#include <random>

#include "tacopt/admm.hpp"
#include "tacopt/chain.hpp"
#include "tacopt/costs.hpp"
#include "tacopt/geometry.hpp"
#include "tacopt/manipulability.hpp"
#include "tacopt/ocp.hpp"
#include "tacopt/oracle.hpp"

namespace tacopt {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec uniform_vec(Rng& rng, int n, double lo, double hi) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

Vec random_unit(Rng& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
  } while (v.norm() < 1e-6);
  return v / v.norm();
}

Mat random_rotation(Rng& rng, int dim) {
  if (dim == 2) {
    double a = uniform(rng, -M_PI, M_PI);
    Mat r(2, 2);
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
  }
  Vec3 axis = Vec3(random_unit(rng, 3));
  double angle = uniform(rng, -M_PI, M_PI);
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

Vec random_config(Rng& rng, const KinematicChain& chain, double margin = 0.0) {
  Vec q(chain.dof());
  for (int i = 0; i < chain.dof(); ++i)
    q[i] = uniform(rng, chain.q_lower()[i] - margin, chain.q_upper()[i] + margin);
  return q;
}

KinematicChain sample_chain(Rng& rng, int index) {
  KinematicChain chain =
      (index % 2 == 0) ? KinematicChain::planar({1.0, 1.0, 1.0}) : KinematicChain::panda();
  // Half the draws carry a rigid tool so the extended-chain paths get covered.
  if (index % 4 >= 2) {
    Isometry3 tool = Isometry3::Identity();
    tool.translation() = Vec3(uniform(rng, 0.1, 0.5), uniform(rng, -0.2, 0.2),
                              chain.is_planar() ? 0.0 : uniform(rng, -0.2, 0.2));
    if (chain.is_planar())
      tool.linear() =
          Eigen::AngleAxisd(uniform(rng, -1.0, 1.0), Vec3::UnitZ()).toRotationMatrix();
    else
      tool.linear() = Mat3(random_rotation(rng, 3));
    chain = chain.with_tool(tool);
  }
  return chain;
}

}  // namespace

CheckResult check_gradients(std::uint64_t seed, int configs_per_term, double tol,
                            double fd_step) {
  CheckResult out{"gradients", true, 0.0, ""};
  Rng rng(seed);
  const char* kinds[] = {"orientation", "position",          "direction",
                         "joint_limit", "manip_directional", "manip_determinant",
                         "manip_tracking"};
  for (const char* kind : kinds) {
    for (int i = 0; i < configs_per_term; ++i) {
      KinematicChain chain = sample_chain(rng, i);
      const int w = chain.workspace_dim();
      const double weight = uniform(rng, 0.5, 3.0);

      Vec q;
      std::function<double(const Vec&)> value;
      Vec grad;
      const std::string k = kind;
      if (k == "orientation") {
        q = random_config(rng, chain);
        Vec axis = random_unit(rng, w);
        grad = cost_orientation(chain, q, axis, weight).grad;
        value = [&, axis](const Vec& qq) {
          return cost_orientation(chain, qq, axis, weight).value;
        };
      } else if (k == "position") {
        q = random_config(rng, chain);
        Vec target = uniform_vec(rng, w, -1.0, 1.0);
        grad = cost_position(chain, q, target, weight).grad;
        value = [&, target](const Vec& qq) {
          return cost_position(chain, qq, target, weight).value;
        };
      } else if (k == "direction") {
        Vec axis = random_unit(rng, w);
        Vec target = random_unit(rng, w);
        // Stay away from the antipodal singularity of the log map.
        int guard = 0;
        do {
          q = random_config(rng, chain);
          ++guard;
        } while (sphere_distance(target, chain.forward_kinematics(q).rotation * axis) >
                     2.8 && guard < 100);
        grad = cost_direction(chain, q, axis, target, weight).grad;
        value = [&, axis, target](const Vec& qq) {
          return cost_direction(chain, qq, axis, target, weight).value;
        };
      } else if (k == "joint_limit") {
        q = random_config(rng, chain, 0.5);  // beyond the limits so some joints violate
        grad = cost_joint_limits(chain, q, weight).grad;
        value = [&](const Vec& qq) { return cost_joint_limits(chain, qq, weight).value; };
      } else {
        // Manipulability terms: resample away from singular configurations,
        // where the capped value is flat and differences are meaningless.
        Vec n = random_unit(rng, w);
        Mat desired = make_desired_ellipsoid(random_unit(rng, w), uniform(rng, 1.0, 3.0),
                                             uniform(rng, 0.3, 0.9));
        int guard = 0;
        do {
          q = random_config(rng, chain);
          auto ell = velocity_manipulability(chain, q, true);
          if (ell.m.determinant() > 1e-3 && n.dot(ell.m * n) > 1e-3) break;
        } while (++guard < 100);
        if (k == "manip_directional") {
          grad = cost_manip_directional(chain, q, n, weight).grad;
          value = [&, n](const Vec& qq) {
            return cost_manip_directional(chain, qq, n, weight).value;
          };
        } else if (k == "manip_determinant") {
          grad = cost_manip_determinant(chain, q, weight).grad;
          value = [&](const Vec& qq) {
            return cost_manip_determinant(chain, qq, weight).value;
          };
        } else {
          grad = cost_manip_tracking(chain, q, desired, weight).grad;
          value = [&, desired](const Vec& qq) {
            return cost_manip_tracking(chain, qq, desired, weight).value;
          };
        }
      }

      Vec ref = oracle::fd_gradient(value, q, fd_step);
      double err = (grad - ref).norm() / std::max(1.0, ref.norm());
      if (err > out.max_error) {
        out.max_error = err;
        out.detail = std::string(kind) + " instance " + std::to_string(i);
      }
      if (err > tol) out.pass = false;
    }
  }
  return out;
}

CheckResult check_batch_lqr(std::uint64_t seed, int instances, double tol) {
  CheckResult out{"batch_lqr", true, 0.0, ""};
  Rng rng(seed);
  for (int i = 0; i < instances; ++i) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(n));
    const int t_end = 1 + static_cast<int>(rng() % 10);
    std::vector<Mat> a, b, q, r;
    std::vector<Vec> d;
    for (int t = 0; t < t_end; ++t) {
      Mat at(n, n), bt(n, m), g(n, n);
      for (int rr = 0; rr < n; ++rr)
        for (int c = 0; c < n; ++c) at(rr, c) = uniform(rng, -1.0, 1.0) / std::sqrt(n);
      for (int rr = 0; rr < n; ++rr)
        for (int c = 0; c < m; ++c) bt(rr, c) = uniform(rng, -1.0, 1.0);
      for (int rr = 0; rr < n; ++rr)
        for (int c = 0; c < n; ++c) g(rr, c) = uniform(rng, -1.0, 1.0);
      a.push_back(at);
      b.push_back(bt);
      q.push_back(g.transpose() * g + 0.1 * Mat::Identity(n, n));
      Vec rdiag = uniform_vec(rng, m, 0.1, 1.1);
      r.push_back(Mat(rdiag.asDiagonal()));
      d.push_back(uniform_vec(rng, n, -1.0, 1.0));
    }
    Vec x0 = uniform_vec(rng, n, -1.0, 1.0);

    Mat q_big = Mat::Zero(n * t_end, n * t_end);
    Mat r_big = Mat::Zero(m * t_end, m * t_end);
    Vec d_big(n * t_end);
    for (int t = 0; t < t_end; ++t) {
      q_big.block(t * n, t * n, n, n) = q[static_cast<size_t>(t)];
      r_big.block(t * m, t * m, m, m) = r[static_cast<size_t>(t)];
      d_big.segment(t * n, n) = d[static_cast<size_t>(t)];
    }

    Vec u_batch = batch_lqr(a, b, q_big, r_big, x0, d_big);
    Vec u_dp = oracle::riccati_lqr(a, b, q, r, x0, d);
    double err = (u_batch - u_dp).cwiseAbs().maxCoeff();
    if (err > out.max_error) {
      out.max_error = err;
      out.detail = "instance " + std::to_string(i);
    }
    if (err > tol) out.pass = false;
  }
  return out;
}

CheckResult check_projections(std::uint64_t seed, int instances_per_family,
                              double resolution) {
  CheckResult out{"projections", true, 0.0, ""};
  Rng rng(seed);
  const double window = 0.05;

  auto examine = [&](const Vec& x, const Vec& proj,
                     const std::function<bool(const Vec&)>& feasible,
                     const std::function<Vec(const Vec&)>& project,
                     const std::string& label) {
    const auto dim = x.size();
    double idem = (project(proj) - proj).norm();
    bool feas = feasible(proj);
    Vec lo = proj.array() - window;
    Vec hi = proj.array() + window;
    Vec g = oracle::grid_project(x, feasible, lo, hi, resolution);
    double dist = (proj - x).norm();
    double err = idem;
    bool ok = idem <= 1e-12 && feas;
    if (g.size() > 0) {
      double gdist = (g - x).norm();
      // No grid candidate may beat the projection; one must come close to it.
      if (gdist < dist - 1e-9) ok = false;
      double slack = 3.0 * resolution * std::sqrt(static_cast<double>(dim));
      if (gdist > dist + slack) ok = false;
      err = std::max(err, std::max(0.0, dist - gdist));
    } else {
      ok = false;  // the window around the projection holds no feasible point
    }
    if (err > out.max_error) {
      out.max_error = err;
      out.detail = label;
    }
    if (!ok) {
      out.pass = false;
      out.detail = label;
    }
  };

  for (int i = 0; i < instances_per_family; ++i) {
    const int dim = (i % 2 == 0) ? 2 : 3;

    {  // componentwise box
      Vec lo(dim), hi(dim);
      for (int k = 0; k < dim; ++k) {
        lo[k] = uniform(rng, -1.5, 0.0);
        hi[k] = lo[k] + uniform(rng, 0.1, 2.0);
      }
      Vec x = uniform_vec(rng, dim, -3.0, 3.0);
      Vec proj = project_box(x, lo, hi);
      examine(
          x, proj,
          [&](const Vec& y) { return (y.array() >= lo.array() - 1e-15).all() &&
                                     (y.array() <= hi.array() + 1e-15).all(); },
          [&](const Vec& y) { return project_box(y, lo, hi); },
          "box instance " + std::to_string(i));
    }

    {  // affine band
      Vec a = random_unit(rng, dim);
      double lower = uniform(rng, -1.0, 0.0);
      double upper = lower + uniform(rng, 0.1, 1.5);
      Vec x = uniform_vec(rng, dim, -2.0, 2.0);
      Vec proj = project_affine_band(x, a, lower, upper);
      examine(
          x, proj,
          [&](const Vec& y) {
            double v = a.dot(y);
            return v >= lower - 1e-12 && v <= upper + 1e-12;
          },
          [&](const Vec& y) { return project_affine_band(y, a, lower, upper); },
          "affine instance " + std::to_string(i));
    }

    {  // oriented box
      OrientedBox box;
      box.center = uniform_vec(rng, dim, -1.0, 1.0);
      box.rotation = random_rotation(rng, dim);
      box.half_extents = uniform_vec(rng, dim, 0.05, 1.0);
      Vec x = uniform_vec(rng, dim, -2.5, 2.5);
      Vec proj = project_oriented_box(x, box);
      examine(
          x, proj, [&](const Vec& y) { return box.contains(y, 1e-12); },
          [&](const Vec& y) { return project_oriented_box(y, box); },
          "oriented box instance " + std::to_string(i));
    }
  }
  return out;
}

CheckResult check_geometry(std::uint64_t seed, int sphere_pairs, int spd_matrices,
                           double sphere_tol, double spd_tol) {
  CheckResult out{"geometry", true, 0.0, ""};
  Rng rng(seed);

  for (int i = 0; i < sphere_pairs; ++i) {
    const int dim = 2 + static_cast<int>(rng() % 3);
    Vec x = random_unit(rng, dim);
    Vec y = random_unit(rng, dim);
    if (sphere_distance(x, y) > M_PI - 0.1) { --i; continue; }
    Vec u = sphere_log(x, y);
    Vec back = sphere_exp(x, u);
    double err = (back - y).norm();
    err = std::max(err, std::abs(u.norm() - sphere_distance(x, y)));
    if (err > out.max_error) {
      out.max_error = err;
      out.detail = "sphere pair " + std::to_string(i);
    }
    if (err > sphere_tol) out.pass = false;
  }

  for (int i = 0; i < spd_matrices; ++i) {
    const int dim = 2 + static_cast<int>(rng() % 4);
    Mat g(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) g(r, c) = uniform(rng, -1.0, 1.0);
    Mat m = g.transpose() * g + 0.1 * Mat::Identity(dim, dim);
    Mat back = spd_exp(spd_log(m).value);
    double err = (back - m).norm();
    if (err > out.max_error) {
      out.max_error = err;
      out.detail = "spd matrix " + std::to_string(i);
    }
    if (err > spd_tol) out.pass = false;
  }
  return out;
}

CheckResult check_linearization(std::uint64_t seed, int trajectories, double min_ratio) {
  CheckResult out{"linearization", true, 0.0, ""};
  out.max_error = std::numeric_limits<double>::infinity();  // tracks the worst ratio
  Rng rng(seed);
  for (int i = 0; i < trajectories; ++i) {
    KinematicChain chain =
        (i % 2 == 0) ? KinematicChain::planar({1.0, 1.0, 1.0}) : KinematicChain::panda();
    const int d = chain.dof();
    const int t_end = 10 + static_cast<int>(rng() % 11);
    Vec q0 = random_config(rng, chain) * 0.5;
    Mat u(d, t_end);
    for (int t = 0; t < t_end; ++t) u.col(t) = uniform_vec(rng, d, -1.0, 1.0);
    const double dt = 0.02;
    Trajectory nominal = rollout(chain, q0, u, dt);
    LinearizedSystem lin = linearize(chain, nominal);

    Vec du = random_unit(rng, d * t_end);
    auto remainder = [&](double h) {
      Trajectory pert = rollout_stacked(chain, q0, nominal.stacked_control() + h * du, dt);
      return (pert.stacked_state() - nominal.stacked_state() - h * lin.apply_su(du)).norm();
    };
    const double h = 1e-3;
    double r1 = remainder(h);
    double r2 = remainder(h / 2.0);
    if (r2 < 1e-14) continue;  // effectively linear; nothing to measure
    double ratio = r1 / r2;
    if (ratio < out.max_error) {
      out.max_error = ratio;
      out.detail = "trajectory " + std::to_string(i);
    }
    if (ratio < min_ratio) out.pass = false;
  }
  return out;
}

std::vector<CheckResult> run_all_checks(std::uint64_t seed) {
  return {check_gradients(seed), check_batch_lqr(seed), check_projections(seed),
          check_geometry(seed), check_linearization(seed)};
}

}  // namespace tacopt
