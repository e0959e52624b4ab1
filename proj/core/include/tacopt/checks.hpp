#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tacopt/types.hpp"

namespace tacopt {

struct CheckResult {
  std::string name;
  bool pass = false;
  double max_error = 0.0;
  std::string detail;
};

// Analytic/internal gradients of every cost term against an independent
// central-difference oracle over random (chain, configuration, term) draws.
CheckResult check_gradients(std::uint64_t seed = 1234, int configs_per_term = 50,
                            double tol = 1e-4, double fd_step = 1e-6);

// Stacked batch LQR against a backward Riccati recursion on random
// time-varying instances (state dim <= 3, horizon <= 10).
CheckResult check_batch_lqr(std::uint64_t seed = 1234, int instances = 50,
                            double tol = 1e-8);

// Projections: idempotence, feasibility, and optimality against an exhaustive
// grid search in a window around the returned point (the feasible sets are
// convex, so a local certificate extends globally).
CheckResult check_projections(std::uint64_t seed = 1234, int instances_per_family = 100,
                              double resolution = 1e-3);

// Sphere exp/log round trips and SPD log/exp round trips.
CheckResult check_geometry(std::uint64_t seed = 1234, int sphere_pairs = 1000,
                           int spd_matrices = 100, double sphere_tol = 1e-9,
                           double spd_tol = 1e-8);

// First-order consistency of the stacked linearization: halving the control
// perturbation must shrink the rollout remainder at least `min_ratio` times.
CheckResult check_linearization(std::uint64_t seed = 1234, int trajectories = 20,
                                double min_ratio = 3.5);

std::vector<CheckResult> run_all_checks(std::uint64_t seed = 1234);

}  // namespace tacopt
