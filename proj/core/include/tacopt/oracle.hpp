#pragma once

#include <functional>
#include <vector>

#include "tacopt/types.hpp"

// Independent reference implementations used to verify the main code paths.
// Everything here is written for clarity over speed and shares no machinery
// with the solver: plain central differences, a textbook Riccati recursion,
// and exhaustive grid search.
namespace tacopt::oracle {

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double step);

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double step);

// Finite-horizon tracking LQR by backward dynamic programming:
// minimize sum_{t=1..T} (x_t - d_t)^T Q_t (x_t - d_t) + sum_{t=0..T-1} u_t^T R_t u_t
// subject to x_{t+1} = A_t x_t + B_t u_t. Returns the stacked optimal controls.
Vec riccati_lqr(const std::vector<Mat>& a, const std::vector<Mat>& b,
                const std::vector<Mat>& q, const std::vector<Mat>& r, const Vec& x0,
                const std::vector<Vec>& d);

// Nearest feasible point on the regular grid spanning [lo, hi] with the given
// spacing (exhaustive; guards against absurd grid sizes). Returns an empty
// vector when no grid point is feasible.
Vec grid_project(const Vec& x, const std::function<bool(const Vec&)>& feasible,
                 const Vec& lo, const Vec& hi, double resolution);

}  // namespace tacopt::oracle
