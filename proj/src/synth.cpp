#include "dyncal/synth.hpp"

#include <array>
#include <cmath>
#include <string>

#include "dyncal/error.hpp"

namespace dyncal {

namespace {

void check_bounds(const AxisBounds& b, const char* what) {
  if (!(b.x_lo <= b.x_hi && b.y_lo <= b.y_hi && b.z_lo <= b.z_hi))
    throw ConfigError(std::string(what) + ": lower bound above upper bound");
  if (b.y_lo < -90.0 || b.y_hi > 90.0)
    throw ConfigError(std::string(what) + ": y bounds must lie within [-90, 90]");
}

double uniform(double lo, double hi, std::mt19937_64& rng) {
  return lo + (hi - lo) * unit_uniform(rng);
}

struct Component {
  Eigen::Vector3d axis;
  double amplitude_rad;
  double omega;  // rad/s
  double phase;
};

struct SensorTrack {
  Rotation base;
  std::vector<Component> components;
  Eigen::Vector3d anchor;
  Eigen::Vector3d limb;
};

struct Body {
  std::vector<SensorTrack> tracks;
  double heading_amp_rad = 0;
  double heading_omega = 0;
  double heading_phase = 0;
  double heading_phase2 = 0;
  double sway = 0;
  std::array<double, 3> sway_phase{};

  double heading(double t) const {
    return heading_amp_rad * (std::sin(heading_omega * t + heading_phase) +
                              0.5 * std::sin(2.3 * heading_omega * t + heading_phase2));
  }

  Rotation orientation(std::size_t s, double t) const {
    const SensorTrack& tr = tracks[s];
    Rotation r = Rotation::about_y(rad2deg(heading(t))) * tr.base;
    for (const Component& c : tr.components)
      r = r * Rotation::exp(c.axis * (c.amplitude_rad * std::sin(c.omega * t + c.phase)));
    return r;
  }

  Eigen::Vector3d root_position(double t) const {
    constexpr double w = 2.0 * kPi;
    return sway * Eigen::Vector3d(0.15 * std::sin(w * 0.2 * t + sway_phase[0]),
                                  0.04 * std::sin(w * 1.1 * t + sway_phase[1]),
                                  0.15 * std::sin(w * 0.17 * t + sway_phase[2]));
  }

  Eigen::Vector3d endpoint(std::size_t s, double t) const {
    const SensorTrack& tr = tracks[s];
    return root_position(t) + Rotation::about_y(rad2deg(heading(t))) * tr.anchor +
           orientation(s, t) * tr.limb;
  }
};

// Joint anchors relative to the hip and the vector from joint to sensor, in
// the default six-sensor order.
const std::array<Eigen::Vector3d, 6> kAnchors = {
    Eigen::Vector3d(-0.20, 0.45, 0.0), Eigen::Vector3d(0.20, 0.45, 0.0),
    Eigen::Vector3d(-0.10, -0.45, 0.0), Eigen::Vector3d(0.10, -0.45, 0.0),
    Eigen::Vector3d(0.0, 0.60, 0.0), Eigen::Vector3d(0.0, 0.0, 0.0)};
const std::array<Eigen::Vector3d, 6> kLimbs = {
    Eigen::Vector3d(0.0, -0.25, 0.0), Eigen::Vector3d(0.0, -0.25, 0.0),
    Eigen::Vector3d(0.0, -0.40, 0.0), Eigen::Vector3d(0.0, -0.40, 0.0),
    Eigen::Vector3d(0.0, 0.10, 0.0), Eigen::Vector3d(0.0, 0.0, 0.0)};

Eigen::Vector3d random_axis(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = Eigen::Vector3d(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

}  // namespace

void ParamDistribution::validate() const {
  check_bounds(offset, "offset");
  check_bounds(drift_root, "root drift");
  check_bounds(drift_nonroot, "drift");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

EulerXYZ sample_euler(const AxisBounds& b, std::mt19937_64& rng) {
  EulerXYZ e;
  e.theta_x = uniform(b.x_lo, b.x_hi, rng);
  e.theta_y = uniform(b.y_lo, b.y_hi, rng);
  e.theta_z = uniform(b.z_lo, b.z_hi, rng);
  return e;
}

SensorCalib sample_params(const ParamDistribution& dist, bool is_root, std::mt19937_64& rng) {
  SensorCalib p;
  p.drift = mat_from_euler(sample_euler(is_root ? dist.drift_root : dist.drift_nonroot, rng));
  p.offset = mat_from_euler(sample_euler(dist.offset, rng));
  return p;
}

SensorCalib sample_params(const ParamDistribution& dist, bool is_root, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_params(dist, is_root, rng);
}

MotionSpec MotionSpec::preset(const std::string& name) {
  MotionSpec spec;
  if (name == "active") return spec;
  if (name == "calm") {
    spec.amplitude_deg = 20.0;
    spec.min_freq_hz = 0.1;
    spec.max_freq_hz = 0.3;
    return spec;
  }
  if (name == "static") {
    spec.amplitude_deg = 0.0;
    return spec;
  }
  throw ConfigError("unknown motion preset '" + name + "' (expected active, calm or static)");
}

namespace {

Body make_body(const MotionSpec& spec, std::uint64_t seed) {
  if (!(spec.duration_s > 0.0)) throw ConfigError("motion duration must be positive");
  if (!(spec.rate_hz > 0.0)) throw ConfigError("motion rate must be positive");
  if (spec.sensors < 1) throw ConfigError("motion needs at least one sensor");
  if (spec.min_components < 1 || spec.max_components < spec.min_components)
    throw ConfigError("invalid component range");

  std::mt19937_64 rng(mix_seed(seed, 0));
  const double two_pi = 2.0 * kPi;
  const bool six = spec.sensors == kDefaultSensorCount;

  Body body;
  body.heading_amp_rad = deg2rad(spec.heading_scale * spec.amplitude_deg);
  body.heading_omega = two_pi * spec.heading_freq_hz;
  body.heading_phase = uniform(0, two_pi, rng);
  body.heading_phase2 = uniform(0, two_pi, rng);
  body.sway = spec.amplitude_deg / 90.0;
  for (double& p : body.sway_phase) p = uniform(0, two_pi, rng);

  body.tracks.resize(spec.sensors);
  for (int s = 0; s < spec.sensors; ++s) {
    SensorTrack& tr = body.tracks[s];
    double scale = 1.0;
    if (s == spec.root_index) scale = spec.root_scale;
    else if (six && s == static_cast<int>(SensorSite::kHead)) scale = spec.head_scale;

    tr.base = mat_from_euler(sample_euler(AxisBounds::symmetric(30, 30, 30), rng));
    tr.anchor = six ? kAnchors[s] : Eigen::Vector3d::Zero();
    tr.limb = six ? kLimbs[s] : Eigen::Vector3d(0.0, -0.3, 0.0);

    const int span = spec.max_components - spec.min_components + 1;
    const int count = spec.min_components + static_cast<int>(unit_uniform(rng) * span);
    std::vector<double> weights(count);
    double total = 0;
    for (double& w : weights) total += (w = uniform(0.5, 1.0, rng));
    for (int k = 0; k < count; ++k) {
      Component c;
      c.axis = random_axis(rng);
      c.amplitude_rad = deg2rad(scale * spec.amplitude_deg) * weights[k] / total;
      c.omega = two_pi * uniform(spec.min_freq_hz, spec.max_freq_hz, rng);
      c.phase = uniform(0, two_pi, rng);
      tr.components.push_back(c);
    }
  }
  return body;
}

}  // namespace

MotionSequence gen_motion(const MotionSpec& spec, std::uint64_t seed) {
  const Body body = make_body(spec, seed);
  MotionSequence seq;
  seq.rate_hz = spec.rate_hz;
  const auto frames = static_cast<std::size_t>(std::llround(spec.duration_s * spec.rate_hz));
  const double h = 1.0 / spec.rate_hz;
  seq.frames.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) * h;
    ImuFrame& frame = seq.frames[f];
    frame.t = static_cast<long>(f);
    frame.sensors.resize(spec.sensors);
    for (int s = 0; s < spec.sensors; ++s) {
      frame.sensors[s].orientation = body.orientation(s, t);
      frame.sensors[s].accel =
          (body.endpoint(s, t + h) - 2.0 * body.endpoint(s, t) + body.endpoint(s, t - h)) / (h * h);
    }
  }
  return seq;
}

std::vector<Eigen::Vector3d> sensor_positions(const MotionSpec& spec, std::uint64_t seed, double t) {
  const Body body = make_body(spec, seed);
  std::vector<Eigen::Vector3d> out(spec.sensors);
  for (int s = 0; s < spec.sensors; ++s) out[s] = body.endpoint(s, t);
  return out;
}

std::vector<Rot6D> TrainingSample::drift_labels() const {
  std::vector<Rot6D> out;
  for (const SensorCalib& p : params) out.push_back(rot6d_from_mat(p.drift));
  return out;
}

std::vector<Rot6D> TrainingSample::offset_labels() const {
  std::vector<Rot6D> out;
  for (const SensorCalib& p : params) out.push_back(rot6d_from_mat(p.offset));
  return out;
}

TrainingSample make_sample(const MotionSequence& motion, std::size_t start,
                           const ParamDistribution& dist, std::uint64_t seed, bool leakage,
                           int root_index, int n) {
  if (n < 2) throw DataError("window length must be at least 2");
  if (start + static_cast<std::size_t>(n) > motion.size()) {
    throw DataError("window [" + std::to_string(start) + ", " + std::to_string(start + n) +
                    ") exceeds motion length " + std::to_string(motion.size()));
  }
  const std::size_t sensors = motion.sensor_count();
  std::mt19937_64 rng(mix_seed(seed, 1));
  CalibState state = CalibState::identity(sensors);
  for (std::size_t s = 0; s < sensors; ++s)
    state.sensors[s] = sample_params(dist, static_cast<int>(s) == root_index, rng);

  TrainingSample sample;
  sample.params = state.sensors;
  sample.window.reserve(n);
  for (std::size_t f = start; f < start + n; ++f)
    sample.window.push_back(apply_measurement_model(motion.frames[f], state, leakage));
  return sample;
}

}  // namespace dyncal
