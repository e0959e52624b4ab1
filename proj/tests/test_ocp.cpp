#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tacopt/chain.hpp"
#include "tacopt/ocp.hpp"
#include "tacopt/oracle.hpp"

using namespace tacopt;

namespace {
bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }
}  // namespace

TEST_CASE("rollout integrates joint velocities") {
  const auto arm = KinematicChain::planar({1.0, 1.0});
  Mat u(2, 2);
  u.col(0) << 1.0, 0.5;
  u.col(1) << -1.0, 0.0;
  const Trajectory traj = rollout(arm, Vec::Zero(2), u, 0.1);
  CHECK(traj.horizon() == 2);
  CHECK(traj.dof() == 2);
  CHECK(traj.workspace_dim() == 2);
  CHECK(traj.dt == 0.1);
  CHECK(near(traj.q(0, 1), 0.1, 1e-15));
  CHECK(near(traj.q(1, 1), 0.05, 1e-15));
  CHECK(near(traj.q(0, 2), 0.0, 1e-15));
  CHECK(near(traj.q(1, 2), 0.05, 1e-15));
  // Carried positions match the chain.
  for (int t = 0; t <= 2; ++t)
    CHECK((traj.p.col(t) - arm.forward_kinematics(traj.q.col(t)).position).norm() < 1e-14);
}

TEST_CASE("stacked views use [q_t; p_t] blocks from t = 1") {
  const auto arm = KinematicChain::planar({1.0, 1.0});
  Mat u(2, 2);
  u.col(0) << 0.3, -0.2;
  u.col(1) << 0.1, 0.4;
  const Trajectory traj = rollout(arm, (Vec(2) << 0.2, 0.1).finished(), u, 0.05);
  const Vec x = traj.stacked_state();
  REQUIRE(x.size() == 2 * (2 + 2));
  CHECK((x.segment(0, 2) - traj.q.col(1)).norm() == 0.0);
  CHECK((x.segment(2, 2) - traj.p.col(1)).norm() == 0.0);
  CHECK((x.segment(4, 2) - traj.q.col(2)).norm() == 0.0);
  CHECK((x.segment(6, 2) - traj.p.col(2)).norm() == 0.0);
  const Vec uu = traj.stacked_control();
  CHECK((uu.segment(0, 2) - u.col(0)).norm() == 0.0);
  CHECK((uu.segment(2, 2) - u.col(1)).norm() == 0.0);

  const Trajectory same = rollout_stacked(arm, (Vec(2) << 0.2, 0.1).finished(), uu, 0.05);
  CHECK((same.q - traj.q).norm() == 0.0);
  CHECK((same.u - traj.u).norm() == 0.0);
}

TEST_CASE("linearization exposes consistent dense and implicit forms") {
  const auto arm = KinematicChain::planar({1.0, 1.0, 1.0});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Mat u(3, 5);
  for (int t = 0; t < 5; ++t)
    for (int i = 0; i < 3; ++i) u(i, t) = dist(rng);
  const Trajectory traj = rollout(arm, (Vec(3) << 0.4, -0.3, 0.2).finished(), u, 0.02);
  const LinearizedSystem lin = linearize(arm, traj);
  CHECK(lin.horizon() == 5);
  CHECK(lin.state_dim() == 5);
  CHECK(lin.jac.size() == 5);
  CHECK((lin.jac[0] - arm.position_jacobian(traj.q.col(1))).norm() < 1e-14);
  CHECK(lin.a(0).rows() == 5);
  CHECK(lin.b(0).cols() == 3);

  const Mat dense = lin.dense_su();
  REQUIRE(dense.rows() == 25);
  REQUIRE(dense.cols() == 15);
  Vec du(15);
  for (int i = 0; i < 15; ++i) du(i) = dist(rng);
  CHECK((lin.apply_su(du) - dense * du).norm() < 1e-12);
  Vec vx(25);
  for (int i = 0; i < 25; ++i) vx(i) = dist(rng);
  CHECK((lin.apply_su_transpose(vx) - dense.transpose() * vx).norm() < 1e-12);

  // First-order: the stacked remainder shrinks quadratically with the step.
  const Vec base = traj.stacked_state();
  auto remainder = [&](double scale) {
    const Vec pert = traj.stacked_control() + scale * du;
    const Trajectory rolled = rollout_stacked(arm, traj.q.col(0), pert, traj.dt);
    return (rolled.stacked_state() - base - lin.apply_su(scale * du)).norm();
  };
  const double r1 = remainder(1e-3);
  const double r2 = remainder(5e-4);
  CHECK(r1 / r2 > 3.5);
}

TEST_CASE("stack dynamics frozen scalar system") {
  std::vector<Mat> a(2, Mat::Constant(1, 1, 2.0));
  std::vector<Mat> b(2, Mat::Constant(1, 1, 1.0));
  const StackedDynamics sd = stack_dynamics(a, b);
  CHECK(near(sd.s_x(0, 0), 2.0, 1e-15));
  CHECK(near(sd.s_x(1, 0), 4.0, 1e-15));
  CHECK(near(sd.s_u(0, 0), 1.0, 1e-15));
  CHECK(near(sd.s_u(0, 1), 0.0, 1e-15));
  CHECK(near(sd.s_u(1, 0), 2.0, 1e-15));
  CHECK(near(sd.s_u(1, 1), 1.0, 1e-15));
}

TEST_CASE("batch lqr solves the hand-worked two-step instance") {
  // min (u0 - 1)^2 + (u0 + u1 - 2)^2 + u0^2 + u1^2 -> u = (0.8, 0.6).
  std::vector<Mat> a(2, Mat::Identity(1, 1));
  std::vector<Mat> b(2, Mat::Identity(1, 1));
  const Mat q = Mat::Identity(2, 2);
  const Mat r = Mat::Identity(2, 2);
  const Vec x0 = Vec::Zero(1);
  const Vec xd = (Vec(2) << 1.0, 2.0).finished();
  const Vec u = batch_lqr(a, b, q, r, x0, xd);
  REQUIRE(u.size() == 2);
  CHECK(near(u(0), 0.8, 1e-12));
  CHECK(near(u(1), 0.6, 1e-12));

  // The dynamic-programming oracle lands on the same controls.
  std::vector<Mat> qs(2, Mat::Identity(1, 1)), rs(2, Mat::Identity(1, 1));
  std::vector<Vec> d = {(Vec(1) << 1.0).finished(), (Vec(1) << 2.0).finished()};
  const Vec u_dp = oracle::riccati_lqr(a, b, qs, rs, x0, d);
  CHECK((u - u_dp).norm() < 1e-12);
}

TEST_CASE("batch lqr matches the riccati oracle on random instances") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % 2);
    const int t_end = 2 + static_cast<int>(rng() % 6);
    std::vector<Mat> a, b, qs, rs;
    std::vector<Vec> d;
    Mat q_big = Mat::Zero(n * t_end, n * t_end);
    Mat r_big = Mat::Zero(m * t_end, m * t_end);
    Vec xd(n * t_end), x0(n);
    for (int i = 0; i < n; ++i) x0(i) = dist(rng);
    for (int t = 0; t < t_end; ++t) {
      Mat at(n, n), bt(n, m);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) at(i, j) = dist(rng);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) bt(i, j) = dist(rng);
      Mat qt = Mat::Identity(n, n) * (0.5 + 0.5 * std::abs(dist(rng)));
      Mat rt = Mat::Identity(m, m) * (0.5 + 0.5 * std::abs(dist(rng)));
      Vec dt(n);
      for (int i = 0; i < n; ++i) dt(i) = dist(rng);
      a.push_back(at);
      b.push_back(bt);
      qs.push_back(qt);
      rs.push_back(rt);
      d.push_back(dt);
      q_big.block(t * n, t * n, n, n) = qt;
      r_big.block(t * m, t * m, m, m) = rt;
      xd.segment(t * n, n) = dt;
    }
    const Vec u_batch = batch_lqr(a, b, q_big, r_big, x0, xd);
    const Vec u_dp = oracle::riccati_lqr(a, b, qs, rs, x0, d);
    CHECK((u_batch - u_dp).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("ilqr step reduces to the proximal target without task cost") {
  const auto arm = KinematicChain::planar({1.0, 1.0});
  Mat u0 = Mat::Zero(2, 3);
  const Trajectory traj = rollout(arm, Vec::Zero(2), u0, 0.01);
  const LinearizedSystem lin = linearize(arm, traj);

  CostExpansion ex;
  ex.grad_q.assign(3, Vec::Zero(2));
  ex.hess_q.assign(3, Mat());
  ex.active.assign(3, false);

  IlqrOptions opt;
  opt.r_control = 0.0;
  opt.r_r = 0.5;
  Vec du_r(6);
  du_r << 1, -2, 3, 0.5, -0.5, 2;
  const Vec du = ilqr_step(lin, ex, du_r, Vec::Zero(6), opt);
  CHECK((du - du_r).norm() < 1e-12);

  // No pull at all leaves the controls alone.
  const Vec still = ilqr_step(lin, ex, Vec::Zero(6), Vec::Zero(6), opt);
  CHECK(still.norm() < 1e-12);
}

TEST_CASE("ilqr step is stationary for its quadratic model") {
  const auto arm = KinematicChain::planar({1.0, 1.0, 1.0});
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const int t_end = 4, d = 3, w = 2;
  Mat u(d, t_end);
  for (int t = 0; t < t_end; ++t)
    for (int i = 0; i < d; ++i) u(i, t) = dist(rng);
  const Trajectory traj = rollout(arm, (Vec(3) << 0.5, -0.2, 0.4).finished(), u, 0.05);
  const LinearizedSystem lin = linearize(arm, traj);

  CostExpansion ex;
  for (int t = 0; t < t_end; ++t) {
    Vec g(d);
    for (int i = 0; i < d; ++i) g(i) = dist(rng);
    Mat root(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) root(i, j) = dist(rng);
    ex.grad_q.push_back(g);
    ex.hess_q.push_back(Mat(root * root.transpose()));
    ex.active.push_back(true);
  }

  IlqrOptions opt;
  opt.r_control = 0.2;
  opt.r_r = 0.7;
  Vec du_r(d * t_end), u_hat(d * t_end);
  for (int i = 0; i < d * t_end; ++i) {
    du_r(i) = dist(rng);
    u_hat(i) = dist(rng);
  }
  const Vec du = ilqr_step(lin, ex, du_r, u_hat, opt);

  // Rebuild the documented objective from the dense sensitivity and check the
  // returned step is its stationary point.
  const Mat dense = lin.dense_su();
  auto model = [&](const Vec& v) {
    const Vec dx = dense * v;
    double total = opt.r_control * (u_hat + v).squaredNorm() + opt.r_r * (v - du_r).squaredNorm();
    for (int t = 1; t <= t_end; ++t) {
      const Vec dq = dx.segment((t - 1) * (d + w), d);
      const auto k = static_cast<size_t>(t - 1);
      total += ex.grad_q[k].dot(dq) + 0.5 * dq.dot(ex.hess_q[k] * dq);
    }
    return total;
  };
  const Vec grad = oracle::fd_gradient(model, du, 1e-6);
  CHECK(grad.norm() < 1e-7);
  // And it genuinely minimizes: random perturbations only increase the model.
  for (int k = 0; k < 5; ++k) {
    Vec pert(d * t_end);
    for (int i = 0; i < d * t_end; ++i) pert(i) = 0.1 * dist(rng);
    CHECK(model(du + pert) >= model(du) - 1e-12);
  }
}

TEST_CASE("line search halves until the cost drops") {
  const auto arm = KinematicChain::planar({1.0});
  const Trajectory current = rollout(arm, Vec::Zero(1), Mat::Zero(1, 1), 1.0);
  auto roll = [&](const Vec& u) { return rollout_stacked(arm, Vec::Zero(1), u, 1.0); };

  // cost(alpha) = (3 alpha - 1)^2 along du = 1: worse at 1, better at 1/2.
  auto cost_fn = [](const Trajectory& t) {
    const double v = 3.0 * t.u(0, 0) - 1.0;
    return v * v;
  };
  const double c0 = cost_fn(current);
  const auto res = line_search(roll, cost_fn, current, c0, Vec::Zero(1),
                               (Vec(1) << 1.0).finished(), 1.0 / 1024.0);
  CHECK_FALSE(res.no_progress);
  CHECK(near(res.alpha, 0.5, 1e-15));
  CHECK(near(res.cost, 0.25, 1e-15));
  CHECK(near(res.traj.u(0, 0), 0.5, 1e-15));

  // A direction with no descent gives up and keeps the current point.
  auto uphill = [](const Trajectory& t) { return 1.0 + std::abs(t.u(0, 0)); };
  const auto stuck = line_search(roll, uphill, current, uphill(current), Vec::Zero(1),
                                 (Vec(1) << 1.0).finished(), 1.0 / 1024.0);
  CHECK(stuck.no_progress);
  CHECK(stuck.alpha == 0.0);
  CHECK(near(stuck.cost, uphill(current), 1e-15));
  CHECK((stuck.traj.u - current.u).norm() == 0.0);
}
