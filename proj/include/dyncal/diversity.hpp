#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dyncal/rotmath.hpp"

namespace dyncal {

constexpr int kGridX = 24;
constexpr int kGridY = 12;
constexpr int kGridZ = 24;
constexpr int kGridCells = kGridX * kGridY * kGridZ;  // 6912
constexpr double kGridStepDeg = 15.0;

struct GridCell {
  int i = 0;
  int j = 0;
  int k = 0;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Euler-space bin of a rotation: floor((angle - lower) / 15), clamped.
GridCell euler_cell(const Rotation& r);

/// Occupancy counts over the 24x12x24 Euler grid. Single writer.
class EulerGrid {
 public:
  EulerGrid() : counts_(kGridCells, 0) {}

  void add(const Rotation& r);
  void clear();

  std::uint32_t count(const GridCell& c) const { return counts_[index(c)]; }
  /// Number of occupied cells.
  int diversity() const { return occupied_; }
  std::uint64_t total() const { return total_; }

 private:
  static int index(const GridCell& c) { return (c.i * kGridY + c.j) * kGridZ + c.k; }
  std::vector<std::uint32_t> counts_;
  int occupied_ = 0;
  std::uint64_t total_ = 0;
};

/// Rotation diversity (number of distinct occupied cells). Throws DataError
/// on an empty sequence.
int rotation_diversity(std::span<const Rotation> seq);

/// Per-sensor calibration thresholds T_R. A sensor is updated only when its
/// RD is strictly greater than its threshold.
struct TriggerConfig {
  std::vector<int> thresholds{30, 50, 30, 30, 25, 15};

  static constexpr int kDisabled = std::numeric_limits<int>::max();

  static TriggerConfig disabled(std::size_t sensor_count) {
    return TriggerConfig{std::vector<int>(sensor_count, kDisabled)};
  }
  void validate(std::size_t sensor_count) const;
};

bool should_update(int rd, int sensor, const TriggerConfig& cfg);

}  // namespace dyncal
