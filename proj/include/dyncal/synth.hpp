#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dyncal/rotmath.hpp"
#include "dyncal/sensor_model.hpp"

namespace dyncal {

/// Inclusive uniform bounds in degrees for each Euler axis.
struct AxisBounds {
  double x_lo = 0, x_hi = 0;
  double y_lo = 0, y_hi = 0;
  double z_lo = 0, z_hi = 0;

  static AxisBounds symmetric(double x, double y, double z) { return {-x, x, -y, y, -z, z}; }
};

/// Sampling distribution for drift and offset. Defaults follow the training
/// distribution: offset U(-45,45) on every axis, drift U(-20,20) on x and z
/// with U(-60,60) yaw for limbs and zero yaw for the root.
struct ParamDistribution {
  AxisBounds offset = AxisBounds::symmetric(45, 45, 45);
  AxisBounds drift_root = AxisBounds::symmetric(20, 0, 20);
  AxisBounds drift_nonroot = AxisBounds::symmetric(20, 60, 20);

  static ParamDistribution zero() {
    return {AxisBounds{}, AxisBounds{}, AxisBounds{}};
  }
  void validate() const;
};

/// Seed mixing for per-sample generators (splitmix64 finaliser).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Uniform double in [0, 1) from the top 53 bits of the engine output.
double unit_uniform(std::mt19937_64& rng);

EulerXYZ sample_euler(const AxisBounds& b, std::mt19937_64& rng);
SensorCalib sample_params(const ParamDistribution& dist, bool is_root, std::mt19937_64& rng);
SensorCalib sample_params(const ParamDistribution& dist, bool is_root, std::uint64_t seed);

struct MotionSequence {
  std::vector<ImuFrame> frames;  ///< ground truth: R_GB and a_G
  double rate_hz = 30.0;

  std::size_t size() const { return frames.size(); }
  std::size_t sensor_count() const { return frames.empty() ? 0 : frames.front().sensor_count(); }
};

/// Parameters of the parametric motion generator.
///
/// Each sensor's orientation is a shared slowly varying heading about +Y
/// times a product of 2-5 sinusoidal axis-angle components. Accelerations
/// are the second central difference of a synthetic limb endpoint.
struct MotionSpec {
  double duration_s = 60.0;
  double rate_hz = 30.0;
  int sensors = kDefaultSensorCount;
  int root_index = kDefaultRootIndex;
  double amplitude_deg = 90.0;   ///< peak local swing of limb sensors
  double head_scale = 0.8;       ///< amplitude multiplier for the head
  double root_scale = 0.5;       ///< amplitude multiplier for the root
  double heading_scale = 1.5;    ///< shared heading amplitude / amplitude
  double heading_freq_hz = 0.03;
  double min_freq_hz = 0.4;
  double max_freq_hz = 1.2;
  int min_components = 2;
  int max_components = 5;

  /// "active", "calm" or "static".
  static MotionSpec preset(const std::string& name);
};

MotionSequence gen_motion(const MotionSpec& spec, std::uint64_t seed);

/// Limb endpoint positions (m) of the generated body at time t; the
/// accelerations of gen_motion are their second central difference.
std::vector<Eigen::Vector3d> sensor_positions(const MotionSpec& spec, std::uint64_t seed, double t);

/// A window of measured frames with its constant per-sensor labels.
struct TrainingSample {
  Window window;
  std::vector<SensorCalib> params;

  /// Labels as (drift 6D, offset 6D) per sensor.
  std::vector<Rot6D> drift_labels() const;
  std::vector<Rot6D> offset_labels() const;
};

constexpr int kDefaultWindowLength = 256;

/// Draws one (drift, offset) pair per sensor and applies it to
/// motion[start, start + n). Throws DataError when the window is out of range.
TrainingSample make_sample(const MotionSequence& motion, std::size_t start,
                           const ParamDistribution& dist, std::uint64_t seed, bool leakage,
                           int root_index = kDefaultRootIndex, int n = kDefaultWindowLength);

}  // namespace dyncal
