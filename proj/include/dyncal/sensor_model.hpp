#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dyncal/rotmath.hpp"

namespace dyncal {

/// Default sensor placement order. The last entry (hip) is the root.
enum class SensorSite : int {
  kLeftForearm = 0,
  kRightForearm = 1,
  kLeftLowerLeg = 2,
  kRightLowerLeg = 3,
  kHead = 4,
  kHip = 5,
};

constexpr int kDefaultSensorCount = 6;
constexpr int kDefaultRootIndex = static_cast<int>(SensorSite::kHip);

std::string_view sensor_name(int index);

/// Gravity in the ego-yaw frame, +Y up.
struct GravitySpec {
  Eigen::Vector3d g{0.0, -9.80665, 0.0};
};

/// One sensor's reading. Depending on context the fields hold either the
/// measured quantities (R_IMU, a_IMU) or the ground truth (R_GB, a_G).
struct SensorReading {
  Rotation orientation;
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();
};

struct ImuFrame {
  long t = 0;
  std::vector<SensorReading> sensors;

  std::size_t sensor_count() const { return sensors.size(); }
};

/// Consecutive frames; the estimator input and the training sample payload.
using Window = std::vector<ImuFrame>;

/// Coordinate drift R_G'G and mounting offset R_BS for one sensor.
struct SensorCalib {
  Rotation drift;
  Rotation offset;
};

struct CalibState {
  std::vector<SensorCalib> sensors;
  long last_trigger_frame = -1;

  static CalibState identity(std::size_t sensor_count) {
    CalibState s;
    s.sensors.resize(sensor_count);
    return s;
  }
  std::size_t sensor_count() const { return sensors.size(); }
};

/// Forward model: orientation <- drift * R_GB * offset,
/// accel <- drift * a_G (+ (I - drift) * g when `leakage`).
ImuFrame apply_measurement_model(const ImuFrame& truth, const CalibState& state, bool leakage,
                                 const GravitySpec& gravity = {});

/// Inverse model: orientation <- drift^T * R_IMU * offset^T, accel <- drift^T * a_IMU.
ImuFrame calibrate(const ImuFrame& measured, const CalibState& state);

/// Leakage term (I - drift) * g on its own.
Eigen::Vector3d gravity_leakage(const Rotation& drift, const GravitySpec& gravity = {});

/// Recovers (drift, offset) from a measured orientation, the sensor's
/// reference orientation R_GS and the bone orientation R_GB.
SensorCalib extract_gt_params(const Rotation& r_imu, const Rotation& r_gs, const Rotation& r_gb);

struct EgoYawFrame {
  ImuFrame frame;
  Rotation root_yaw;
  bool yaw_indeterminate = false;
};

/// Removes the root sensor's heading from every sensor in the frame.
EgoYawFrame to_ego_yaw(const ImuFrame& frame, int root_index);

/// Throws DataError when a frame violates the ImuFrame invariants
/// (non-finite or implausible acceleration, invalid rotation).
void validate_frame(const ImuFrame& frame, double rotation_tol = 1e-6);

}  // namespace dyncal
