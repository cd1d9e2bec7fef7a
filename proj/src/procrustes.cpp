#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "dyncal/diversity.hpp"
#include "dyncal/error.hpp"
#include "dyncal/estimator.hpp"

namespace dyncal {

namespace {

// Relative motions below 1 degree or near a half turn give unreliable axes.
constexpr double kMinAxisAngle = deg2rad(1.0);
constexpr double kMaxAxisAngle = deg2rad(179.0);

double residual(const std::vector<Eigen::Matrix3d>& ref, const std::vector<Eigen::Matrix3d>& meas,
                const Eigen::Matrix3d& x, const Eigen::Matrix3d& y) {
  double r = 0.0;
  for (std::size_t t = 0; t < ref.size(); ++t) r += (x * ref[t] * y - meas[t]).squaredNorm();
  return r;
}

Eigen::Matrix3d solve_drift(const std::vector<Eigen::Matrix3d>& ref,
                            const std::vector<Eigen::Matrix3d>& meas, const Eigen::Matrix3d& y) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (std::size_t t = 0; t < ref.size(); ++t) m += meas[t] * (ref[t] * y).transpose();
  return kabsch(m).matrix();
}

Eigen::Matrix3d solve_offset(const std::vector<Eigen::Matrix3d>& ref,
                             const std::vector<Eigen::Matrix3d>& meas, const Eigen::Matrix3d& x) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (std::size_t t = 0; t < ref.size(); ++t) m += (x * ref[t]).transpose() * meas[t];
  return kabsch(m).matrix();
}

// meas(t) meas(0)^T = X ref(t) ref(0)^T X^T, so X carries the rotation axes of
// the reference's relative motions onto those of the measurements.
std::optional<Eigen::Matrix3d> axis_alignment_drift(const std::vector<Eigen::Matrix3d>& ref,
                                                    const std::vector<Eigen::Matrix3d>& meas) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  int pairs = 0;
  for (std::size_t t = 1; t < ref.size(); ++t) {
    const Eigen::Vector3d d = Rotation::unchecked(ref[t] * ref[0].transpose()).log();
    const Eigen::Vector3d c = Rotation::unchecked(meas[t] * meas[0].transpose()).log();
    const double angle = d.norm();
    if (angle < kMinAxisAngle || angle > kMaxAxisAngle) continue;
    h += c * d.transpose();
    ++pairs;
  }
  if (pairs < 2) return std::nullopt;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h);
  const auto sv = svd.singularValues();
  if (!(sv(1) > 1e-6 * sv(0))) return std::nullopt;
  return kabsch(h).matrix();
}

}  // namespace

Rotation kabsch(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (u * v.transpose()).determinant() < 0 ? -1.0 : 1.0;
  return Rotation::unchecked(u * d * v.transpose());
}

Rotation align_vectors(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  return Rotation::unchecked(
      Eigen::Quaterniond::FromTwoVectors(from, to).normalized().toRotationMatrix());
}

std::optional<Rotation> leakage_tilt(std::span<const Eigen::Vector3d> measured_accel,
                                     std::span<const Eigen::Vector3d> reference_accel,
                                     const Rotation& drift_estimate, const ProcrustesOptions& opts) {
  if (measured_accel.size() != reference_accel.size())
    throw DataError("measured and reference accelerations differ in length");
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  int used = 0;
  for (std::size_t t = 0; t < measured_accel.size(); ++t) {
    if (reference_accel[t].norm() >= opts.low_motion_accel) continue;
    mean += measured_accel[t] - drift_estimate * reference_accel[t];
    ++used;
  }
  if (used == 0) return std::nullopt;
  mean /= used;
  const Eigen::Vector3d target = opts.gravity.g - mean;
  if (target.norm() < 1e-9) return std::nullopt;
  return align_vectors(opts.gravity.g, target);
}

EstimateOut procrustes_estimate(const Window& window, const Window& reference,
                                const ProcrustesOptions& opts) {
  validate_window(window);
  if (reference.size() != window.size()) {
    throw DataError("reference has " + std::to_string(reference.size()) +
                    " frames but the window has " + std::to_string(window.size()));
  }
  const std::size_t sensors = window.front().sensor_count();
  for (const ImuFrame& f : reference)
    if (f.sensor_count() != sensors) throw DataError("reference sensor count mismatch");
  if (opts.initial_offsets && opts.initial_offsets->size() != sensors)
    throw ConfigError("initial offsets must be given for every sensor");

  const std::size_t n = window.size();
  EstimateOut out;
  out.sensors.resize(sensors);
  std::vector<Eigen::Matrix3d> ref(n), meas(n);
  std::vector<Rotation> meas_rot(n);
  for (std::size_t s = 0; s < sensors; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      ref[t] = reference[t].sensors[s].orientation.matrix();
      meas[t] = window[t].sensors[s].orientation.matrix();
      meas_rot[t] = window[t].sensors[s].orientation;
    }
    SensorEstimate& est = out.sensors[s];
    est.degenerate = rotation_diversity(meas_rot) == 1;

    Eigen::Matrix3d y = Eigen::Matrix3d::Identity();
    if (opts.initial_offsets) {
      y = (*opts.initial_offsets)[s].matrix();
    } else if (auto x0 = axis_alignment_drift(ref, meas)) {
      y = solve_offset(ref, meas, *x0);
    }

    Eigen::Matrix3d x = Eigen::Matrix3d::Identity();
    double prev = std::numeric_limits<double>::infinity();
    est.converged = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
      x = solve_drift(ref, meas, y);
      y = solve_offset(ref, meas, x);
      const double r = residual(ref, meas, x, y);
      est.residual_history.push_back(r);
      est.iterations = it + 1;
      if (std::abs(prev - r) < opts.tolerance) {
        est.converged = true;
        break;
      }
      prev = r;
    }
    est.residual = est.residual_history.back();

    if (opts.gravity_refinement) {
      std::vector<Eigen::Vector3d> acc(n), acc_ref(n);
      for (std::size_t t = 0; t < n; ++t) {
        acc[t] = window[t].sensors[s].accel;
        acc_ref[t] = reference[t].sensors[s].accel;
      }
      const Rotation xr = Rotation::unchecked(x);
      if (auto tilt = leakage_tilt(acc, acc_ref, xr, opts)) {
        // Keep the heading of X, replace its tilt.
        const Rotation current_tilt = align_vectors(opts.gravity.g, xr * opts.gravity.g);
        x = (*tilt * current_tilt.transpose() * xr).matrix();
        y = solve_offset(ref, meas, x);
        est.residual = residual(ref, meas, x, y);
      }
    }

    est.delta_drift = Rotation::nearest(x);
    est.delta_offset = Rotation::nearest(y);
    out.iterations = std::max(out.iterations, est.iterations);
  }
  return out;
}

}  // namespace dyncal
