#include "dyncal/sensor_model.hpp"

#include <array>
#include <sstream>
#include <string>

#include "dyncal/error.hpp"

namespace dyncal {

namespace {

constexpr double kAccelSanityBound = 200.0;

void require_same_count(const ImuFrame& frame, const CalibState& state) {
  if (frame.sensor_count() != state.sensor_count()) {
    std::ostringstream os;
    os << "frame has " << frame.sensor_count() << " sensors but calibration state has "
       << state.sensor_count();
    throw DataError(os.str());
  }
}

}  // namespace

std::string_view sensor_name(int index) {
  static constexpr std::array<std::string_view, 6> kNames = {
      "left_forearm", "right_forearm", "left_lower_leg", "right_lower_leg", "head", "hip"};
  if (index >= 0 && index < static_cast<int>(kNames.size())) return kNames[index];
  return "sensor";
}

ImuFrame apply_measurement_model(const ImuFrame& truth, const CalibState& state, bool leakage,
                                 const GravitySpec& gravity) {
  require_same_count(truth, state);
  ImuFrame out;
  out.t = truth.t;
  out.sensors.resize(truth.sensor_count());
  for (std::size_t s = 0; s < truth.sensor_count(); ++s) {
    const SensorCalib& p = state.sensors[s];
    const SensorReading& in = truth.sensors[s];
    out.sensors[s].orientation = p.drift * in.orientation * p.offset;
    out.sensors[s].accel = p.drift * in.accel;
    if (leakage) out.sensors[s].accel += gravity_leakage(p.drift, gravity);
  }
  return out;
}

ImuFrame calibrate(const ImuFrame& measured, const CalibState& state) {
  require_same_count(measured, state);
  ImuFrame out;
  out.t = measured.t;
  out.sensors.resize(measured.sensor_count());
  for (std::size_t s = 0; s < measured.sensor_count(); ++s) {
    const SensorCalib& p = state.sensors[s];
    const Rotation drift_t = p.drift.transpose();
    out.sensors[s].orientation = drift_t * measured.sensors[s].orientation * p.offset.transpose();
    out.sensors[s].accel = drift_t * measured.sensors[s].accel;
  }
  return out;
}

Eigen::Vector3d gravity_leakage(const Rotation& drift, const GravitySpec& gravity) {
  return gravity.g - drift * gravity.g;
}

SensorCalib extract_gt_params(const Rotation& r_imu, const Rotation& r_gs, const Rotation& r_gb) {
  return SensorCalib{r_imu * r_gs.transpose(), r_gb.transpose() * r_gs};
}

EgoYawFrame to_ego_yaw(const ImuFrame& frame, int root_index) {
  if (root_index < 0 || root_index >= static_cast<int>(frame.sensor_count()))
    throw DataError("root index " + std::to_string(root_index) + " out of range");
  const YawSplit split = yaw_decompose(frame.sensors[root_index].orientation);
  EgoYawFrame out;
  if (split.indeterminate) {
    out.frame = frame;
    out.yaw_indeterminate = true;
    return out;
  }
  out.root_yaw = split.yaw;
  const Rotation inv = split.yaw.transpose();
  out.frame.t = frame.t;
  out.frame.sensors.reserve(frame.sensor_count());
  for (const SensorReading& r : frame.sensors)
    out.frame.sensors.push_back({inv * r.orientation, inv * r.accel});
  return out;
}

void validate_frame(const ImuFrame& frame, double rotation_tol) {
  for (std::size_t s = 0; s < frame.sensor_count(); ++s) {
    const SensorReading& r = frame.sensors[s];
    if (!r.accel.allFinite() || !r.orientation.matrix().allFinite()) {
      throw DataError("frame " + std::to_string(frame.t) + " sensor " + std::to_string(s) +
                      ": non-finite value");
    }
    if (r.accel.norm() >= kAccelSanityBound) {
      throw DataError("frame " + std::to_string(frame.t) + " sensor " + std::to_string(s) +
                      ": acceleration exceeds sanity bound");
    }
    if (r.orientation.orthonormality_error() > rotation_tol) {
      throw DataError("frame " + std::to_string(frame.t) + " sensor " + std::to_string(s) +
                      ": orientation is not a rotation");
    }
  }
}

}  // namespace dyncal
