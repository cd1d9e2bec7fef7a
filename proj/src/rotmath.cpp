#include "dyncal/rotmath.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "dyncal/error.hpp"

namespace dyncal {

Rotation Rotation::from_matrix(const Eigen::Matrix3d& m, double tol) {
  Rotation r(m);
  if (!m.allFinite()) throw DataError("rotation has non-finite entries");
  const double err = r.orthonormality_error();
  if (err > tol) {
    std::ostringstream os;
    os << "matrix is not a rotation (orthonormality error " << err << ")";
    throw DataError(os.str());
  }
  return r;
}

Rotation Rotation::nearest(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return Rotation(svd.matrixU() * d * svd.matrixV().transpose());
}

Rotation Rotation::about_x(double deg) {
  const double c = std::cos(deg2rad(deg)), s = std::sin(deg2rad(deg));
  Eigen::Matrix3d m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return Rotation(m);
}

Rotation Rotation::about_y(double deg) {
  const double c = std::cos(deg2rad(deg)), s = std::sin(deg2rad(deg));
  Eigen::Matrix3d m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return Rotation(m);
}

Rotation Rotation::about_z(double deg) {
  const double c = std::cos(deg2rad(deg)), s = std::sin(deg2rad(deg));
  Eigen::Matrix3d m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return Rotation(m);
}

Rotation Rotation::about_axis(const Eigen::Vector3d& axis, double deg) {
  return exp(axis.normalized() * deg2rad(deg));
}

Rotation Rotation::exp(const Eigen::Vector3d& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-300) return Rotation();
  return Rotation(Eigen::AngleAxisd(angle, rotvec / angle).toRotationMatrix());
}

Eigen::Vector3d Rotation::log() const {
  Eigen::AngleAxisd aa(Eigen::Quaterniond(m_).normalized());
  double angle = aa.angle();
  Eigen::Vector3d axis = aa.axis();
  if (angle > kPi) {
    angle = 2.0 * kPi - angle;
    axis = -axis;
  }
  return axis * angle;
}

double Rotation::orthonormality_error() const {
  const double ortho = (m_.transpose() * m_ - Eigen::Matrix3d::Identity()).norm();
  return std::max(ortho, std::abs(m_.determinant() - 1.0));
}

std::array<double, 9> Rotation::row_major() const {
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[r * 3 + c] = m_(r, c);
  return out;
}

Rotation Rotation::from_row_major(const std::array<double, 9>& v, double tol) {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = v[r * 3 + c];
  return from_matrix(m, tol);
}

Rotation mat_from_euler(const EulerXYZ& e) {
  return Rotation::about_z(e.theta_z) * Rotation::about_y(e.theta_y) * Rotation::about_x(e.theta_x);
}

EulerXYZ euler_from_mat(const Rotation& r) {
  const Eigen::Matrix3d& m = r.matrix();
  // R = Rz Ry Rx: m(2,0) = -sin(y), m(0,0) = cos(y)cos(z), m(1,0) = cos(y)sin(z).
  const double cy = std::hypot(m(0, 0), m(1, 0));
  EulerXYZ e;
  if (cy > 1e-12) {
    e.theta_y = rad2deg(std::atan2(-m(2, 0), cy));
    e.theta_x = rad2deg(std::atan2(m(2, 1), m(2, 2)));
    e.theta_z = rad2deg(std::atan2(m(1, 0), m(0, 0)));
  } else {
    // Gimbal lock: theta_x := 0, remaining rotation goes to theta_z.
    e.theta_y = m(2, 0) < 0 ? 90.0 : -90.0;
    e.theta_x = 0.0;
    e.theta_z = rad2deg(std::atan2(-m(0, 1), m(1, 1)));
  }
  return e;
}

double geodesic_deg(const Rotation& a, const Rotation& b) {
  // atan2 form of arccos((tr - 1) / 2); keeps precision near 0 and 180.
  const Eigen::Matrix3d d = a.matrix().transpose() * b.matrix();
  const double c = std::clamp((d.trace() - 1.0) * 0.5, -1.0, 1.0);
  const Eigen::Vector3d v(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
  const double s = 0.5 * v.norm();
  return rad2deg(std::atan2(s, c));
}

Rotation mat_from_rot6d(const Rot6D& v) {
  const Eigen::Vector3d a1(v[0], v[1], v[2]);
  const Eigen::Vector3d a2(v[3], v[4], v[5]);
  const double n1 = a1.norm();
  if (!(n1 > 1e-12) || !a2.allFinite()) throw DataError("degenerate 6D input");
  const Eigen::Vector3d b1 = a1 / n1;
  const Eigen::Vector3d p = a2 - b1.dot(a2) * b1;
  const double n2 = p.norm();
  if (!(n2 > 1e-12 * std::max(1.0, a2.norm()))) throw DataError("degenerate 6D input");
  const Eigen::Vector3d b2 = p / n2;
  Eigen::Matrix3d m;
  m.col(0) = b1;
  m.col(1) = b2;
  m.col(2) = b1.cross(b2);
  return Rotation::unchecked(m);
}

Rot6D rot6d_from_mat(const Rotation& r) {
  const Eigen::Matrix3d& m = r.matrix();
  return {m(0, 0), m(1, 0), m(2, 0), m(0, 1), m(1, 1), m(2, 1)};
}

YawSplit yaw_decompose(const Rotation& r) {
  const Eigen::Matrix3d& m = r.matrix();
  static const double kVerticalCos = std::cos(deg2rad(1.0));
  YawSplit out;
  double psi = 0.0;
  const Eigen::Vector3d fwd = m.col(2);
  const Eigen::Vector3d side = m.col(0);
  if (std::abs(fwd.y()) < kVerticalCos * fwd.norm()) {
    // Ry(psi) * e_z = (sin psi, 0, cos psi)
    psi = std::atan2(fwd.x(), fwd.z());
  } else if (std::abs(side.y()) < kVerticalCos * side.norm()) {
    // Ry(psi) * e_x = (cos psi, 0, -sin psi)
    psi = std::atan2(-side.z(), side.x());
  } else {
    out.indeterminate = true;
  }
  out.yaw_deg = rad2deg(psi);
  out.yaw = Rotation::about_y(out.yaw_deg);
  out.residual = out.yaw.transpose() * r;
  return out;
}

}  // namespace dyncal
