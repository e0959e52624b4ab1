#include <benchmark/benchmark.h>

#include "tacopt/admm.hpp"
#include "tacopt/chain.hpp"
#include "tacopt/manipulability.hpp"
#include "tacopt/ocp.hpp"
#include "tacopt/scenario.hpp"

using namespace tacopt;

namespace {

const Vec kq3 = (Vec(3) << 0.3, -0.2, 0.1).finished();
const Vec kq7 = (Vec(7) << 0.0, -0.6, 0.0, -2.2, 0.0, 1.8, 0.8).finished();

void bm_planar_fk(benchmark::State& state) {
  const auto chain = KinematicChain::planar({1.0, 1.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(chain.forward_kinematics(kq3));
}
BENCHMARK(bm_planar_fk);

void bm_spatial_fk(benchmark::State& state) {
  const auto chain = KinematicChain::panda();
  for (auto _ : state) benchmark::DoNotOptimize(chain.forward_kinematics(kq7));
}
BENCHMARK(bm_spatial_fk);

void bm_planar_jacobian(benchmark::State& state) {
  const auto chain = KinematicChain::planar({1.0, 1.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(chain.position_jacobian(kq3));
}
BENCHMARK(bm_planar_jacobian);

void bm_manipulability(benchmark::State& state) {
  const auto chain = KinematicChain::panda();
  for (auto _ : state) benchmark::DoNotOptimize(velocity_manipulability(chain, kq7, true));
}
BENCHMARK(bm_manipulability);

void bm_ilqr_step(benchmark::State& state) {
  const int horizon = static_cast<int>(state.range(0));
  const auto arm = KinematicChain::planar({1.0, 1.0, 1.0});
  const Trajectory traj = rollout(arm, kq3, Mat::Zero(3, horizon), 0.01);
  const LinearizedSystem lin = linearize(arm, traj);
  CostExpansion ex;
  for (int t = 1; t <= horizon; ++t) {
    ex.grad_q.push_back(Vec::Constant(3, 0.1));
    ex.hess_q.push_back(Mat::Identity(3, 3));
    ex.active.push_back(true);
  }
  const Vec zero = Vec::Zero(3 * horizon);
  const IlqrOptions opt;
  for (auto _ : state) benchmark::DoNotOptimize(ilqr_step(lin, ex, zero, zero, opt));
}
BENCHMARK(bm_ilqr_step)->Arg(50)->Arg(100);

void bm_viapoint_solve(benchmark::State& state) {
  const Problem pb = to_problem(make_preset("fig3a-1"));
  for (auto _ : state) benchmark::DoNotOptimize(solve(pb));
}
BENCHMARK(bm_viapoint_solve)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
