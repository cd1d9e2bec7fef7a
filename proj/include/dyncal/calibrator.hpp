#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dyncal/diversity.hpp"
#include "dyncal/estimator.hpp"
#include "dyncal/schedule.hpp"
#include "dyncal/sensor_model.hpp"
#include "dyncal/synth.hpp"

namespace dyncal {

/// What happens to the buffer after an estimation pass.
enum class BufferPolicy {
  kClear,    ///< empty it and refill n frames before the next pass
  kSliding,  ///< keep the newest n frames; a pass may run at every timing tick
};

struct CalibratorConfig {
  int n = 256;
  double t_interval = 1.0;  ///< seconds between timing ticks
  double rate_hz = 30.0;
  TriggerConfig trigger;
  BufferPolicy buffer_policy = BufferPolicy::kClear;
  int root_index = kDefaultRootIndex;

  /// Frames between timing ticks, round(rate_hz * t_interval) >= 1.
  long tick_period() const;
  /// Throws ConfigError on n < 2, t_interval <= 0 or bad thresholds.
  void validate(std::size_t sensor_count) const;
};

/// Ground truth of one frame (bone orientations and accelerations, and the
/// true parameters). Only the oracle and Procrustes estimators need it.
struct GroundTruthFrame {
  ImuFrame bones;
  std::vector<SensorCalib> params;
};

struct TriggerEvent {
  long frame = 0;
  std::vector<int> rd;         ///< per sensor, on the raw buffer
  std::vector<bool> updated;   ///< per sensor
  bool failed = false;         ///< estimator threw; state kept
  std::string diagnostic;
};

/// Online calibration loop for one stream. step() is strictly sequential.
class Calibrator {
 public:
  using Logger = std::function<void(const std::string&)>;

  Calibrator(CalibratorConfig cfg, std::shared_ptr<const Estimator> estimator,
             std::size_t sensor_count);

  /// Calibrates `raw` with the current state, buffers it and, when the
  /// buffer is full and the timing signal fires, runs an estimation pass.
  /// Throws DataError on non-increasing t or a sensor-count mismatch.
  ImuFrame step(const ImuFrame& raw, const GroundTruthFrame* truth = nullptr);

  const CalibState& state() const { return state_; }
  void set_state(CalibState state);
  const CalibratorConfig& config() const { return cfg_; }
  std::size_t buffered() const { return buffer_.size(); }
  const std::vector<TriggerEvent>& events() const { return events_; }
  /// Event produced by the latest step, or null.
  const TriggerEvent* last_event() const { return last_event_ ? &events_.back() : nullptr; }
  void set_logger(Logger logger) { logger_ = std::move(logger); }

 private:
  void run_pass(long frame);

  CalibratorConfig cfg_;
  std::shared_ptr<const Estimator> estimator_;
  CalibState state_;
  std::deque<ImuFrame> buffer_;
  std::deque<GroundTruthFrame> truth_buffer_;
  std::vector<TriggerEvent> events_;
  bool last_event_ = false;
  long last_t_ = 0;
  bool started_ = false;
  Logger logger_;
};

// ---------------------------------------------------------------------------
// Metrics

/// Geodesic angle between calibrated and bone orientation, each expressed in
/// its own stream's ego-yaw frame (yawᵀ · R).
double ome(const Rotation& calibrated, const Rotation& gt_bone, const Rotation& calibrated_root_yaw,
           const Rotation& gt_root_yaw = Rotation());

/// Euclidean acceleration error after the same ego-yaw mapping.
double ame(const Eigen::Vector3d& calibrated_accel, const Eigen::Vector3d& gt_accel,
           const Rotation& calibrated_root_yaw, const Rotation& gt_root_yaw = Rotation());

struct MetricsRow {
  long frame = 0;
  int sensor = 0;
  double ome_deg = 0.0;
  double ame_ms2 = 0.0;
  int rd = 0;  ///< RD of the latest pass covering this sensor, 0 before any
  bool triggered = false;
  double drift_angle_deg = 0.0;   ///< estimated drift's angle from identity
  double offset_angle_deg = 0.0;  ///< estimated offset's angle from identity
};

struct SensorSummary {
  double mean_ome_deg = 0.0;
  double mean_ame_ms2 = 0.0;
};

struct MetricsReport {
  std::size_t sensors = 0;
  std::size_t frames = 0;
  std::vector<MetricsRow> rows;  ///< frame-major, sensor-minor
  std::vector<TriggerEvent> events;
  CalibState final_state;

  const MetricsRow& row(std::size_t frame_index, std::size_t sensor) const {
    return rows[frame_index * sensors + sensor];
  }
  /// Per-sensor means over frames [from, frames).
  std::vector<SensorSummary> summary(std::size_t from = 0) const;
  /// Mean OME over all sensors and frames [from, frames).
  double mean_ome(std::size_t from = 0) const;
  /// Mean OME over sensors at one frame.
  double frame_ome(std::size_t frame_index) const;
};

void write_metrics_csv(const MetricsReport& report, std::ostream& out);

struct SimulationOptions {
  bool leakage = true;
  GravitySpec gravity;
  /// When set, receives every calibrated output frame.
  std::vector<ImuFrame>* calibrated = nullptr;
};

/// Streams the motion through the measurement model (true parameters from
/// the schedule) and a Calibrator, recording per-frame OME/AME.
MetricsReport run_simulation(const MotionSequence& motion, const DriftSchedule& schedule,
                             const CalibratorConfig& cfg,
                             std::shared_ptr<const Estimator> estimator,
                             const SimulationOptions& opts = {});

/// Table-style comparison of a calibrated stream against ground truth.
struct EvalSummary {
  std::vector<SensorSummary> sensors;
  SensorSummary average;
};

/// Throws DataError on empty input ("no frames") or length/sensor mismatch.
EvalSummary evaluate_streams(const std::vector<ImuFrame>& calibrated,
                             const std::vector<ImuFrame>& ground_truth, int root_index);

}  // namespace dyncal
