#include "dyncal/calibrator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "dyncal/error.hpp"

namespace dyncal {

long CalibratorConfig::tick_period() const {
  return std::max(1L, std::lround(rate_hz * t_interval));
}

void CalibratorConfig::validate(std::size_t sensor_count) const {
  if (n < 2) throw ConfigError("buffer length n must be at least 2");
  if (!(t_interval > 0.0) || !std::isfinite(t_interval))
    throw ConfigError("t_interval must be positive");
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw ConfigError("rate must be positive");
  if (root_index < 0 || root_index >= static_cast<int>(sensor_count))
    throw ConfigError("root index out of range");
  trigger.validate(sensor_count);
}

Calibrator::Calibrator(CalibratorConfig cfg, std::shared_ptr<const Estimator> estimator,
                       std::size_t sensor_count)
    : cfg_(std::move(cfg)), estimator_(std::move(estimator)),
      state_(CalibState::identity(sensor_count)) {
  if (!estimator_) throw ConfigError("calibrator needs an estimator");
  cfg_.validate(sensor_count);
}

void Calibrator::set_state(CalibState state) {
  if (state.sensor_count() != state_.sensor_count())
    throw DataError("state sensor count does not match the calibrator");
  state_ = std::move(state);
}

ImuFrame Calibrator::step(const ImuFrame& raw, const GroundTruthFrame* truth) {
  if (raw.sensor_count() != state_.sensor_count()) {
    throw DataError("frame " + std::to_string(raw.t) + " has " +
                    std::to_string(raw.sensor_count()) + " sensors, expected " +
                    std::to_string(state_.sensor_count()));
  }
  if (started_ && raw.t <= last_t_) {
    throw DataError("out-of-order frame: t=" + std::to_string(raw.t) + " after t=" +
                    std::to_string(last_t_));
  }
  started_ = true;
  last_t_ = raw.t;
  last_event_ = false;

  ImuFrame out = calibrate(raw, state_);

  buffer_.push_back(raw);
  if (truth) {
    truth_buffer_.push_back(*truth);
  } else {
    truth_buffer_.emplace_back();
  }
  if (buffer_.size() > static_cast<std::size_t>(cfg_.n)) {
    // Between ticks, or after a sliding pass, keep the newest n frames.
    buffer_.pop_front();
    truth_buffer_.pop_front();
  }

  const bool tick = (raw.t + 1) % cfg_.tick_period() == 0;
  if (tick && buffer_.size() == static_cast<std::size_t>(cfg_.n)) run_pass(raw.t);
  return out;
}

void Calibrator::run_pass(long frame) {
  const std::size_t sensors = state_.sensor_count();
  TriggerEvent ev;
  ev.frame = frame;
  ev.rd.assign(sensors, 0);
  ev.updated.assign(sensors, false);

  Window window;
  window.reserve(buffer_.size());
  for (const ImuFrame& f : buffer_) window.push_back(calibrate(f, state_));

  std::vector<Rotation> seq(buffer_.size());
  for (std::size_t s = 0; s < sensors; ++s) {
    for (std::size_t t = 0; t < buffer_.size(); ++t) seq[t] = buffer_[t].sensors[s].orientation;
    ev.rd[s] = rotation_diversity(seq);
  }

  GroundTruthWindow gt;
  EstimateContext ctx;
  ctx.state = &state_;
  const bool have_truth = std::all_of(truth_buffer_.begin(), truth_buffer_.end(),
                                     [&](const GroundTruthFrame& g) {
                                       return g.bones.sensor_count() == sensors;
                                     });
  if (have_truth) {
    gt.bones.reserve(truth_buffer_.size());
    for (const GroundTruthFrame& g : truth_buffer_) gt.bones.push_back(g.bones);
    gt.params = truth_buffer_.back().params;
    ctx.truth = &gt;
  }

  try {
    const EstimateOut est = estimator_->estimate(window, ctx);
    if (est.sensors.size() != sensors) throw DataError("estimator returned wrong sensor count");
    for (std::size_t s = 0; s < sensors; ++s) {
      if (!should_update(ev.rd[s], static_cast<int>(s), cfg_.trigger)) continue;
      SensorCalib& c = state_.sensors[s];
      c.drift = Rotation::nearest((c.drift * est.sensors[s].delta_drift).matrix());
      c.offset = Rotation::nearest((est.sensors[s].delta_offset * c.offset).matrix());
      ev.updated[s] = true;
    }
  } catch (const std::exception& e) {
    ev.failed = true;
    ev.diagnostic = std::string(estimator_->name()) + " estimator failed at frame " +
                    std::to_string(frame) + ": " + e.what();
    if (logger_) logger_(ev.diagnostic);
  }
  for (bool u : ev.updated) {
    if (u) {
      state_.last_trigger_frame = frame;
      break;
    }
  }

  if (cfg_.buffer_policy == BufferPolicy::kClear) {
    buffer_.clear();
    truth_buffer_.clear();
  }
  events_.push_back(std::move(ev));
  last_event_ = true;
}

}  // namespace dyncal
