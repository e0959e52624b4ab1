#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace tacopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Isometry3 = Eigen::Isometry3d;

// Base class for everything this library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

// Geometry-domain violations (non-unit vectors, antipodal log, non-SPD input).
struct GeometryError : Error {
  using Error::Error;
};

// Thrown when a numerical routine leaves its valid domain (negative determinant
// beyond tolerance, non-finite values, factorization failure).
struct NumericalError : Error {
  using Error::Error;
};

// Scenario file could not be parsed at all (malformed JSON, unknown key).
struct ParseError : Error {
  ParseError(const std::string& what, std::string field_arg)
      : Error(what), field(std::move(field_arg)) {}
  std::string field;
};

// Scenario parsed but a field value is out of domain.
struct ValidationError : Error {
  ValidationError(const std::string& what, std::string field_arg)
      : Error(what), field(std::move(field_arg)) {}
  std::string field;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace tacopt
