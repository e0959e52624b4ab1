#include "tacopt/oracle.hpp"

#include <cmath>

namespace tacopt::oracle {

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double step) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step;
    double fp = f(xp);
    xp[i] = x[i] - step;
    double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double step) {
  Vec xp = x;
  xp[0] = x[0] + step;
  Vec probe = f(xp);
  xp[0] = x[0];
  Mat j(probe.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step;
    Vec fp = f(xp);
    xp[i] = x[i] - step;
    Vec fm = f(xp);
    xp[i] = x[i];
    j.col(i) = (fp - fm) / (2.0 * step);
  }
  return j;
}

Vec riccati_lqr(const std::vector<Mat>& a, const std::vector<Mat>& b,
                const std::vector<Mat>& q, const std::vector<Mat>& r, const Vec& x0,
                const std::vector<Vec>& d) {
  const size_t t_end = a.size();
  require(b.size() == t_end && q.size() == t_end && r.size() == t_end && d.size() == t_end,
          "riccati_lqr needs equally long A, B, Q, R, d lists");
  const auto n = x0.size();
  const auto m = b[0].cols();

  // Cost-to-go V_t(x) = x'P x - 2 s'x + const, including the state cost at t.
  std::vector<Mat> gain_k(t_end);
  std::vector<Vec> gain_c(t_end);
  Mat p = q[t_end - 1];
  Vec s = q[t_end - 1] * d[t_end - 1];
  for (size_t t = t_end; t-- > 0;) {
    Mat mm = r[t] + b[t].transpose() * p * b[t];
    Eigen::LDLT<Mat> ldlt(mm);
    gain_k[t] = -ldlt.solve(b[t].transpose() * p * a[t]);
    gain_c[t] = ldlt.solve(b[t].transpose() * s);
    if (t == 0) break;
    Mat f = a[t] + b[t] * gain_k[t];
    Vec c = b[t] * gain_c[t];
    Mat p_new = gain_k[t].transpose() * r[t] * gain_k[t] + f.transpose() * p * f;
    Vec s_new = f.transpose() * (s - p * c) - gain_k[t].transpose() * r[t] * gain_c[t];
    // State cost at time t (states are penalized for t = 1..T).
    p = q[t - 1] + 0.5 * (p_new + p_new.transpose());
    s = q[t - 1] * d[t - 1] + s_new;
  }

  Vec u(static_cast<Eigen::Index>(t_end) * m);
  Vec x = x0;
  for (size_t t = 0; t < t_end; ++t) {
    Vec ut = gain_k[t] * x + gain_c[t];
    u.segment(static_cast<Eigen::Index>(t) * m, m) = ut;
    x = a[t] * x + b[t] * ut;
  }
  (void)n;
  return u;
}

Vec grid_project(const Vec& x, const std::function<bool(const Vec&)>& feasible,
                 const Vec& lo, const Vec& hi, double resolution) {
  const auto dim = x.size();
  require(lo.size() == dim && hi.size() == dim, "grid bounds size mismatch");
  require(resolution > 0.0, "grid resolution must be positive");
  std::vector<long> counts(static_cast<size_t>(dim));
  double total = 1.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    require(lo[i] <= hi[i], "grid bounds must satisfy lo <= hi");
    counts[static_cast<size_t>(i)] = static_cast<long>(std::floor((hi[i] - lo[i]) / resolution)) + 1;
    total *= static_cast<double>(counts[static_cast<size_t>(i)]);
  }
  require(total <= 2e8, "grid too large; shrink the window or coarsen the resolution");

  std::vector<long> idx(static_cast<size_t>(dim), 0);
  Vec best;
  double best_d2 = std::numeric_limits<double>::infinity();
  Vec candidate(dim);
  while (true) {
    for (Eigen::Index i = 0; i < dim; ++i)
      candidate[i] = lo[i] + resolution * static_cast<double>(idx[static_cast<size_t>(i)]);
    double d2 = (candidate - x).squaredNorm();
    if (d2 < best_d2 && feasible(candidate)) {
      best_d2 = d2;
      best = candidate;
    }
    Eigen::Index carry = 0;
    while (carry < dim) {
      if (++idx[static_cast<size_t>(carry)] < counts[static_cast<size_t>(carry)]) break;
      idx[static_cast<size_t>(carry)] = 0;
      ++carry;
    }
    if (carry == dim) break;
  }
  return best;
}

}  // namespace tacopt::oracle
