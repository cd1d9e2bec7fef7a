#include <cstdio>
#include <ostream>
#include <string>

#include "dyncal/calibrator.hpp"
#include "dyncal/error.hpp"

namespace dyncal {

namespace {

Rotation root_yaw_of(const ImuFrame& frame, int root_index) {
  const YawSplit split = yaw_decompose(frame.sensors.at(root_index).orientation);
  return split.indeterminate ? Rotation() : split.yaw;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double ome(const Rotation& calibrated, const Rotation& gt_bone, const Rotation& calibrated_root_yaw,
           const Rotation& gt_root_yaw) {
  return geodesic_deg(calibrated_root_yaw.transpose() * calibrated, gt_root_yaw.transpose() * gt_bone);
}

double ame(const Eigen::Vector3d& calibrated_accel, const Eigen::Vector3d& gt_accel,
           const Rotation& calibrated_root_yaw, const Rotation& gt_root_yaw) {
  return (calibrated_root_yaw.transpose() * calibrated_accel - gt_root_yaw.transpose() * gt_accel)
      .norm();
}

std::vector<SensorSummary> MetricsReport::summary(std::size_t from) const {
  std::vector<SensorSummary> out(sensors);
  if (from >= frames) return out;
  for (std::size_t f = from; f < frames; ++f) {
    for (std::size_t s = 0; s < sensors; ++s) {
      out[s].mean_ome_deg += row(f, s).ome_deg;
      out[s].mean_ame_ms2 += row(f, s).ame_ms2;
    }
  }
  const double count = static_cast<double>(frames - from);
  for (SensorSummary& s : out) {
    s.mean_ome_deg /= count;
    s.mean_ame_ms2 /= count;
  }
  return out;
}

double MetricsReport::mean_ome(std::size_t from) const {
  if (sensors == 0 || from >= frames) return 0.0;
  double sum = 0.0;
  for (const SensorSummary& s : summary(from)) sum += s.mean_ome_deg;
  return sum / static_cast<double>(sensors);
}

double MetricsReport::frame_ome(std::size_t frame_index) const {
  double sum = 0.0;
  for (std::size_t s = 0; s < sensors; ++s) sum += row(frame_index, s).ome_deg;
  return sensors ? sum / static_cast<double>(sensors) : 0.0;
}

void write_metrics_csv(const MetricsReport& report, std::ostream& out) {
  out << "frame,sensor,ome_deg,ame_ms2,rd,triggered,drift_angle_deg,offset_angle_deg\n";
  for (const MetricsRow& r : report.rows) {
    out << r.frame << ',' << r.sensor << ',' << fmt(r.ome_deg) << ',' << fmt(r.ame_ms2) << ','
        << r.rd << ',' << (r.triggered ? 1 : 0) << ',' << fmt(r.drift_angle_deg) << ','
        << fmt(r.offset_angle_deg) << '\n';
  }
}

MetricsReport run_simulation(const MotionSequence& motion, const DriftSchedule& schedule,
                             const CalibratorConfig& cfg,
                             std::shared_ptr<const Estimator> estimator,
                             const SimulationOptions& opts) {
  if (motion.frames.empty()) throw DataError("no frames");
  const std::size_t sensors = motion.frames.front().sensor_count();
  schedule.validate(sensors, motion.frames.size());

  Calibrator cal(cfg, std::move(estimator), sensors);
  MetricsReport report;
  report.sensors = sensors;
  report.frames = motion.frames.size();
  report.rows.reserve(report.frames * sensors);
  std::vector<int> last_rd(sensors, 0);

  for (std::size_t i = 0; i < motion.frames.size(); ++i) {
    const ImuFrame& gt = motion.frames[i];
    if (gt.sensor_count() != sensors) throw DataError("motion sensor count changes over time");
    const CalibState truth = schedule.at(static_cast<long>(i), motion.rate_hz, sensors, cfg.root_index);
    const ImuFrame measured = apply_measurement_model(gt, truth, opts.leakage, opts.gravity);
    const GroundTruthFrame gtf{gt, truth.sensors};
    const ImuFrame out = cal.step(measured, &gtf);
    if (opts.calibrated) opts.calibrated->push_back(out);

    const TriggerEvent* ev = cal.last_event();
    if (ev) last_rd = ev->rd;
    const Rotation yaw_cal = root_yaw_of(out, cfg.root_index);
    const Rotation yaw_gt = root_yaw_of(gt, cfg.root_index);
    for (std::size_t s = 0; s < sensors; ++s) {
      MetricsRow row;
      row.frame = gt.t;
      row.sensor = static_cast<int>(s);
      row.ome_deg = ome(out.sensors[s].orientation, gt.sensors[s].orientation, yaw_cal, yaw_gt);
      row.ame_ms2 = ame(out.sensors[s].accel, gt.sensors[s].accel, yaw_cal, yaw_gt);
      row.rd = last_rd[s];
      row.triggered = ev && ev->updated[s];
      row.drift_angle_deg = geodesic_deg(cal.state().sensors[s].drift, Rotation());
      row.offset_angle_deg = geodesic_deg(cal.state().sensors[s].offset, Rotation());
      report.rows.push_back(row);
    }
  }
  report.events = cal.events();
  report.final_state = cal.state();
  return report;
}

EvalSummary evaluate_streams(const std::vector<ImuFrame>& calibrated,
                             const std::vector<ImuFrame>& ground_truth, int root_index) {
  if (calibrated.empty() || ground_truth.empty()) throw DataError("no frames");
  if (calibrated.size() != ground_truth.size()) {
    throw DataError("length mismatch: " + std::to_string(calibrated.size()) + " calibrated vs " +
                    std::to_string(ground_truth.size()) + " ground-truth frames");
  }
  const std::size_t sensors = ground_truth.front().sensor_count();
  if (root_index < 0 || root_index >= static_cast<int>(sensors))
    throw DataError("root index out of range");
  EvalSummary out;
  out.sensors.resize(sensors);
  for (std::size_t f = 0; f < calibrated.size(); ++f) {
    const ImuFrame& c = calibrated[f];
    const ImuFrame& g = ground_truth[f];
    if (c.sensor_count() != sensors || g.sensor_count() != sensors)
      throw DataError("frame " + std::to_string(f) + ": sensor count mismatch");
    const Rotation yc = root_yaw_of(c, root_index);
    const Rotation yg = root_yaw_of(g, root_index);
    for (std::size_t s = 0; s < sensors; ++s) {
      out.sensors[s].mean_ome_deg += ome(c.sensors[s].orientation, g.sensors[s].orientation, yc, yg);
      out.sensors[s].mean_ame_ms2 += ame(c.sensors[s].accel, g.sensors[s].accel, yc, yg);
    }
  }
  const double n = static_cast<double>(calibrated.size());
  for (SensorSummary& s : out.sensors) {
    s.mean_ome_deg /= n;
    s.mean_ame_ms2 /= n;
    out.average.mean_ome_deg += s.mean_ome_deg / static_cast<double>(sensors);
    out.average.mean_ame_ms2 += s.mean_ame_ms2 / static_cast<double>(sensors);
  }
  return out;
}

}  // namespace dyncal
