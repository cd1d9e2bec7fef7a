#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "dyncal/synth.hpp"

namespace dyncal {

// Motion files are JSON lines, one frame per line:
//   {"t": 0, "sensors": [{"R": [9 floats, row-major], "a": [3 floats]}, ...]}

MotionSequence load_motion(const std::filesystem::path& path, double rate_hz = 30.0);
MotionSequence read_motion(std::istream& in, double rate_hz = 30.0);
void save_motion(const MotionSequence& motion, const std::filesystem::path& path);
void write_motion(const MotionSequence& motion, std::ostream& out);

// Dataset files (little-endian):
//   "TICD" u32 version=1 u32 S u32 n u64 count
//   per sample: n*S*(9+3) f32 readings (per frame, per sensor: R row-major, a)
//               S*(6+6) f32 labels (per sensor: drift 6D, offset 6D)

/// One serialized sample, kept in the on-disk single precision.
struct DatasetRecord {
  std::vector<float> readings;
  std::vector<float> labels;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

struct Dataset {
  std::uint32_t sensors = 0;
  std::uint32_t window = 0;
  std::vector<DatasetRecord> records;

  /// Rebuilds a measured window (orientations projected onto SO(3)) and the
  /// labelled parameters of record `i`.
  TrainingSample sample(std::size_t i) const;
};

DatasetRecord to_record(const TrainingSample& sample);

void write_dataset(std::span<const TrainingSample> samples, std::uint32_t sensors,
                   std::uint32_t window, const std::filesystem::path& path);
void write_dataset(const Dataset& dataset, std::ostream& out);
Dataset read_dataset(const std::filesystem::path& path);
Dataset read_dataset(std::istream& in);

}  // namespace dyncal
