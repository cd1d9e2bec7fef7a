#include "dyncal/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dyncal/error.hpp"

namespace dyncal {

namespace {

int bin(double angle, double lower, int cells) {
  const int b = static_cast<int>(std::floor((angle - lower) / kGridStepDeg));
  return std::clamp(b, 0, cells - 1);
}

}  // namespace

GridCell euler_cell(const Rotation& r) {
  const EulerXYZ e = euler_from_mat(r);
  return GridCell{bin(e.theta_x, -180.0, kGridX), bin(e.theta_y, -90.0, kGridY),
                  bin(e.theta_z, -180.0, kGridZ)};
}

void EulerGrid::add(const Rotation& r) {
  std::uint32_t& c = counts_[index(euler_cell(r))];
  if (c == 0) ++occupied_;
  ++c;
  ++total_;
}

void EulerGrid::clear() {
  std::fill(counts_.begin(), counts_.end(), 0u);
  occupied_ = 0;
  total_ = 0;
}

int rotation_diversity(std::span<const Rotation> seq) {
  if (seq.empty()) throw DataError("rotation diversity of an empty sequence");
  EulerGrid grid;
  for (const Rotation& r : seq) grid.add(r);
  return grid.diversity();
}

void TriggerConfig::validate(std::size_t sensor_count) const {
  if (thresholds.size() != sensor_count) {
    throw ConfigError("trigger config has " + std::to_string(thresholds.size()) +
                      " thresholds for " + std::to_string(sensor_count) + " sensors");
  }
  for (int t : thresholds)
    if (t < 1) throw ConfigError("trigger thresholds must be >= 1");
}

bool should_update(int rd, int sensor, const TriggerConfig& cfg) {
  if (sensor < 0 || sensor >= static_cast<int>(cfg.thresholds.size()))
    throw ConfigError("sensor index " + std::to_string(sensor) + " has no threshold");
  return rd > cfg.thresholds[sensor];
}

}  // namespace dyncal
