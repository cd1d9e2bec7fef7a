#pragma once

#include <array>
#include <Eigen/Core>

namespace dyncal {

/**
 * A proper rotation (3x3 orthonormal, det +1).
 *
 * Every orientation, drift, offset and delta in the toolkit is carried as a
 * Rotation. Construction through from_matrix() validates; products and
 * transposes of valid rotations are assumed valid and are not re-checked.
 */
class Rotation {
 public:
  Rotation() : m_(Eigen::Matrix3d::Identity()) {}

  static Rotation identity() { return Rotation(); }

  /// Validates orthonormality and det = +1 to within `tol` (Frobenius).
  /// Throws DataError otherwise.
  static Rotation from_matrix(const Eigen::Matrix3d& m, double tol = 1e-9);

  /// Projects an arbitrary (non-singular) matrix onto SO(3) via SVD.
  static Rotation nearest(const Eigen::Matrix3d& m);

  /// Wraps without checking. For internal products only.
  static Rotation unchecked(const Eigen::Matrix3d& m) { return Rotation(m); }

  static Rotation about_x(double deg);
  static Rotation about_y(double deg);
  static Rotation about_z(double deg);
  /// Rotation by `deg` degrees about `axis` (normalised internally).
  static Rotation about_axis(const Eigen::Vector3d& axis, double deg);
  /// Exponential map of a rotation vector in radians.
  static Rotation exp(const Eigen::Vector3d& rotvec);

  const Eigen::Matrix3d& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  Rotation transpose() const { return Rotation(m_.transpose()); }
  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_); }
  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return m_ * v; }

  /// Rotation vector (axis * angle, radians).
  Eigen::Vector3d log() const;

  /// Orthonormality + determinant error; max of ||m^T m - I||_F and |det - 1|.
  double orthonormality_error() const;

  /// Row-major copy of the nine entries.
  std::array<double, 9> row_major() const;
  static Rotation from_row_major(const std::array<double, 9>& v, double tol = 1e-9);

 private:
  explicit Rotation(const Eigen::Matrix3d& m) : m_(m) {}
  Eigen::Matrix3d m_;
};

/// Angles in degrees. Ranges: x in [-180,180], y in [-90,90], z in [-180,180].
struct EulerXYZ {
  double theta_x = 0.0;
  double theta_y = 0.0;
  double theta_z = 0.0;
};

/// First two columns of a rotation matrix, column-major: (c0, c1).
using Rot6D = std::array<double, 6>;

/// Rz(theta_z) * Ry(theta_y) * Rx(theta_x).
Rotation mat_from_euler(const EulerXYZ& e);

/// Inverse of mat_from_euler. At |theta_y| = 90 the free rotation is folded
/// into theta_z and theta_x is reported as 0.
EulerXYZ euler_from_mat(const Rotation& r);

/// Geodesic angle between two rotations, degrees in [0, 180].
double geodesic_deg(const Rotation& a, const Rotation& b);

/// Gram-Schmidt decode. Throws DataError("degenerate 6D input") when the two
/// halves are (near) parallel or zero.
Rotation mat_from_rot6d(const Rot6D& v);
Rot6D rot6d_from_mat(const Rotation& r);

struct YawSplit {
  Rotation yaw;       ///< Ry(psi) about the vertical +Y axis
  Rotation residual;  ///< yaw^T * R
  double yaw_deg = 0.0;
  bool indeterminate = false;
};

/// Splits R into a heading about +Y and a heading-free remainder. Heading is
/// taken from the body +Z axis projected onto the horizontal plane, falling
/// back to body +X when +Z is within 1 degree of vertical.
YawSplit yaw_decompose(const Rotation& r);

constexpr double kPi = 3.14159265358979323846;
constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace dyncal
