#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tacopt/geometry.hpp"

using namespace tacopt;

namespace {
bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }
}  // namespace

TEST_CASE("sphere distance on axis pairs") {
  Vec x(3), y(3);
  x << 1, 0, 0;
  y << 0, 1, 0;
  CHECK(near(sphere_distance(x, y), M_PI / 2, 1e-15));
  CHECK(near(sphere_distance(x, x), 0.0, 1e-12));
  Vec z(3);
  z << std::cos(0.3), std::sin(0.3), 0;
  CHECK(near(sphere_distance(x, z), 0.3, 1e-12));
}

TEST_CASE("sphere log has the right direction and norm") {
  Vec x(3), y(3);
  x << 1, 0, 0;
  y << 0, 1, 0;
  const Vec t = sphere_log(x, y);
  CHECK(near(t(0), 0.0, 1e-15));
  CHECK(near(t(1), M_PI / 2, 1e-15));
  CHECK(near(t(2), 0.0, 1e-15));
  // Tangent vectors live in the orthogonal complement of the base point.
  CHECK(near(t.dot(x), 0.0, 1e-12));
  CHECK(near(sphere_log(x, x).norm(), 0.0, 1e-12));
}

TEST_CASE("sphere exp inverts log") {
  Vec x(2), y(2);
  x << std::cos(0.4), std::sin(0.4);
  y << std::cos(2.1), std::sin(2.1);
  const Vec back = sphere_exp(x, sphere_log(x, y));
  CHECK(near((back - y).norm(), 0.0, 1e-12));
  CHECK(near((sphere_exp(x, Vec::Zero(2)) - x).norm(), 0.0, 1e-15));
}

TEST_CASE("sphere preconditions") {
  Vec x(3), y(3), bad(3);
  x << 1, 0, 0;
  y << -1, 0, 0;
  bad << 1, 1, 0;
  CHECK_THROWS_AS(sphere_log(x, y), GeometryError);     // antipodal
  CHECK_THROWS_AS(sphere_distance(x, bad), GeometryError);
  Vec not_tangent(3);
  not_tangent << 0.5, 0.1, 0.0;  // x component far beyond the 1e-6 slack
  CHECK_THROWS_AS(sphere_exp(x, not_tangent), GeometryError);
}

TEST_CASE("spd log of a frozen 2x2 matrix") {
  // [[2,1],[1,2]] has eigenpairs (1, (1,-1)) and (3, (1,1)), so the log is
  // (ln 3 / 2) * ones(2,2).
  Mat a(2, 2);
  a << 2, 1, 1, 2;
  const SpdLogResult lg = spd_log(a);
  const double c = std::log(3.0) / 2.0;
  CHECK_FALSE(lg.regularized);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(near(lg.value(i, j), c, 1e-14));
  CHECK(near((spd_exp(lg.value) - a).norm(), 0.0, 1e-12));
}

TEST_CASE("spd exp of zero is identity") {
  CHECK(near((spd_exp(Mat::Zero(3, 3)) - Mat::Identity(3, 3)).norm(), 0.0, 1e-15));
}

TEST_CASE("spd inverse square root of a diagonal matrix") {
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 9.0;
  const Mat r = spd_inv_sqrt(d);
  CHECK(near(r(0, 0), 0.5, 1e-14));
  CHECK(near(r(1, 1), 1.0 / 3.0, 1e-14));
  CHECK(near(r(0, 1), 0.0, 1e-14));
}

TEST_CASE("affine-invariant distance frozen values") {
  Mat a(2, 2), i2 = Mat::Identity(2, 2);
  a << 2, 1, 1, 2;
  CHECK(near(spd_distance(a, i2), std::log(3.0), 1e-12));
  // diag(1,4) vs diag(2,2): whitened eigenvalues 1/2 and 2 -> sqrt(2) ln 2.
  Mat m = Mat::Zero(2, 2), md = Mat::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = 4.0;
  md(0, 0) = md(1, 1) = 2.0;
  CHECK(near(spd_distance(m, md), std::sqrt(2.0) * std::log(2.0), 1e-12));
  CHECK(near(spd_distance(a, a), 0.0, 1e-10));
  CHECK(near(spd_distance(m, md), spd_distance(md, m), 1e-10));
}

TEST_CASE("spd log regularizes near-singular input and flags it") {
  Mat s = Mat::Zero(2, 2);
  s(0, 0) = 1.0;
  s(1, 1) = 1e-14;  // below the singular floor
  const SpdLogResult lg = spd_log(s);
  CHECK(lg.regularized);
  CHECK(std::isfinite(lg.value.norm()));
}

TEST_CASE("spd log rejects asymmetric input") {
  Mat bad(2, 2);
  bad << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(spd_log(bad), GeometryError);
}
