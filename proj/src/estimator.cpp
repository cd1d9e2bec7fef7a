#include "dyncal/estimator.hpp"

#include <string>

#include "dyncal/error.hpp"

namespace dyncal {

void validate_window(const Window& window) {
  if (window.size() < 2) throw DataError("window needs at least 2 frames");
  const std::size_t sensors = window.front().sensor_count();
  if (sensors == 0) throw DataError("window frames carry no sensors");
  for (const ImuFrame& f : window) {
    if (f.sensor_count() != sensors) throw DataError("window sensor count changes over time");
    validate_frame(f);
  }
}

EstimateOut oracle_estimate(const Window& window, const GroundTruthWindow& gt,
                            const CalibState& state) {
  if (gt.bones.size() != window.size()) {
    throw DataError("ground truth has " + std::to_string(gt.bones.size()) +
                    " frames but the window has " + std::to_string(window.size()));
  }
  const std::size_t sensors = state.sensor_count();
  if (gt.params.size() != sensors || (!window.empty() && window.front().sensor_count() != sensors))
    throw DataError("ground truth, state and window disagree on sensor count");

  EstimateOut out;
  out.sensors.resize(sensors);
  for (std::size_t s = 0; s < sensors; ++s) {
    out.sensors[s].delta_drift = state.sensors[s].drift.transpose() * gt.params[s].drift;
    out.sensors[s].delta_offset = gt.params[s].offset * state.sensors[s].offset.transpose();
  }
  return out;
}

EstimateOut OracleEstimator::estimate(const Window& window, const EstimateContext& ctx) const {
  if (!ctx.truth || !ctx.state) throw ConfigError("oracle estimator requires ground truth");
  return oracle_estimate(window, *ctx.truth, *ctx.state);
}

EstimateOut ProcrustesEstimator::estimate(const Window& window, const EstimateContext& ctx) const {
  if (!ctx.truth) throw ConfigError("procrustes estimator requires reference orientations");
  return procrustes_estimate(window, ctx.truth->bones, opts_);
}

EstimateOut decode_tic_output(const TicRawOutput& raw, std::size_t sensors) {
  if (raw.drift.size() != sensors * 6 || raw.offset.size() != sensors * 6)
    throw DataError("network output width does not match the sensor count");
  EstimateOut out;
  out.sensors.resize(sensors);
  for (std::size_t s = 0; s < sensors; ++s) {
    Rot6D d, o;
    for (int k = 0; k < 6; ++k) {
      d[k] = raw.drift[s * 6 + k];
      o[k] = raw.offset[s * 6 + k];
    }
    out.sensors[s].delta_drift = mat_from_rot6d(d);
    out.sensors[s].delta_offset = mat_from_rot6d(o);
  }
  return out;
}

EstimateOut tic_forward(const Window& window, const TicNetwork& network) {
  return decode_tic_output(network.forward(window), network.dims().sensors);
}

EstimateOut tic_forward(const Window& window, const WeightBundle& weights) {
  const TicNetwork network(weights);
  return tic_forward(window, network);
}

EstimateOut TicEstimator::estimate(const Window& window, const EstimateContext&) const {
  return tic_forward(window, *network_);
}

}  // namespace dyncal
