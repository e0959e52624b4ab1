#include "tacopt/geometry.hpp"

#include <cmath>

namespace tacopt {

namespace {

void check_unit(const Vec& v, const char* name) {
  if (std::abs(v.norm() - 1.0) > kUnitTol)
    throw GeometryError(std::string(name) + " must be unit length");
}

void check_symmetric(const Mat& m) {
  if (m.rows() != m.cols()) throw DimensionError("matrix must be square");
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw GeometryError("matrix must be symmetric");
}

}  // namespace

double sphere_distance(const Vec& x, const Vec& y) {
  check_unit(x, "x");
  check_unit(y, "y");
  if (x.size() != y.size()) throw DimensionError("sphere points differ in size");
  double c = x.dot(y);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

Vec sphere_log(const Vec& x, const Vec& y) {
  double d = sphere_distance(x, y);
  if (d > M_PI - 1e-9) throw GeometryError("log map undefined for antipodal points");
  Vec perp = y - x.dot(y) * x;
  double n = perp.norm();
  if (n < 1e-15) return Vec::Zero(x.size());
  return (d / n) * perp;
}

Vec sphere_exp(const Vec& x, const Vec& u) {
  check_unit(x, "x");
  if (x.size() != u.size()) throw DimensionError("tangent vector size mismatch");
  if (std::abs(x.dot(u)) > 1e-6) throw GeometryError("u is not tangent at x");
  double n = u.norm();
  if (n < 1e-15) return x;
  Vec y = std::cos(n) * x + (std::sin(n) / n) * u;
  return y / y.norm();
}

SpdLogResult spd_log(const Mat& m) {
  check_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Mat> eig(m);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  Vec lam = eig.eigenvalues();
  SpdLogResult out;
  if (lam.minCoeff() < kSingularEps) {
    lam.array() += kSingularEps;
    out.regularized = true;
  }
  if (lam.minCoeff() <= 0.0)
    throw GeometryError("matrix is not positive definite");
  out.value = eig.eigenvectors() * lam.array().log().matrix().asDiagonal() *
              eig.eigenvectors().transpose();
  return out;
}

Mat spd_exp(const Mat& m) {
  check_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Mat> eig(m);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  return eig.eigenvectors() * eig.eigenvalues().array().exp().matrix().asDiagonal() *
         eig.eigenvectors().transpose();
}

Mat spd_inv_sqrt(const Mat& m) {
  check_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Mat> eig(m);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  Vec lam = eig.eigenvalues();
  if (lam.minCoeff() < kSingularEps) lam.array() += kSingularEps;
  if (lam.minCoeff() <= 0.0)
    throw GeometryError("matrix is not positive definite");
  return eig.eigenvectors() * lam.array().rsqrt().matrix().asDiagonal() *
         eig.eigenvectors().transpose();
}

double spd_distance(const Mat& m, const Mat& md) {
  if (m.rows() != md.rows() || m.cols() != md.cols())
    throw DimensionError("SPD distance needs matching shapes");
  Mat w = spd_inv_sqrt(md);
  return spd_log(w * m * w).value.norm();
}

}  // namespace tacopt
