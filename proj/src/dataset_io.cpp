#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "binary_io.hpp"
#include "dyncal/error.hpp"
#include "dyncal/io.hpp"

namespace dyncal {

namespace {

constexpr char kMagic[5] = "TICD";
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kReadingWidth = 9 + 3;
constexpr std::size_t kLabelWidth = 6 + 6;

}  // namespace

DatasetRecord to_record(const TrainingSample& sample) {
  DatasetRecord rec;
  const std::size_t sensors = sample.params.size();
  rec.readings.reserve(sample.window.size() * sensors * kReadingWidth);
  for (const ImuFrame& frame : sample.window) {
    if (frame.sensor_count() != sensors) throw DataError("sample window sensor count mismatch");
    for (const SensorReading& s : frame.sensors) {
      for (double v : s.orientation.row_major()) rec.readings.push_back(static_cast<float>(v));
      for (int i = 0; i < 3; ++i) rec.readings.push_back(static_cast<float>(s.accel[i]));
    }
  }
  for (const SensorCalib& p : sample.params) {
    for (double v : rot6d_from_mat(p.drift)) rec.labels.push_back(static_cast<float>(v));
    for (double v : rot6d_from_mat(p.offset)) rec.labels.push_back(static_cast<float>(v));
  }
  return rec;
}

TrainingSample Dataset::sample(std::size_t i) const {
  const DatasetRecord& rec = records.at(i);
  TrainingSample out;
  std::size_t k = 0;
  out.window.resize(window);
  for (std::uint32_t f = 0; f < window; ++f) {
    ImuFrame& frame = out.window[f];
    frame.t = f;
    frame.sensors.resize(sensors);
    for (std::uint32_t s = 0; s < sensors; ++s) {
      Eigen::Matrix3d m;
      for (int j = 0; j < 9; ++j) m(j / 3, j % 3) = rec.readings[k++];
      frame.sensors[s].orientation = Rotation::nearest(m);
      for (int j = 0; j < 3; ++j) frame.sensors[s].accel[j] = rec.readings[k++];
    }
  }
  k = 0;
  out.params.resize(sensors);
  for (std::uint32_t s = 0; s < sensors; ++s) {
    Rot6D d, o;
    for (double& v : d) v = rec.labels[k++];
    for (double& v : o) v = rec.labels[k++];
    out.params[s] = {mat_from_rot6d(d), mat_from_rot6d(o)};
  }
  return out;
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  const std::size_t reading_count = std::size_t{dataset.window} * dataset.sensors * kReadingWidth;
  const std::size_t label_count = std::size_t{dataset.sensors} * kLabelWidth;
  out.write(kMagic, 4);
  detail::put_le<std::uint32_t>(out, kVersion);
  detail::put_le<std::uint32_t>(out, dataset.sensors);
  detail::put_le<std::uint32_t>(out, dataset.window);
  detail::put_le<std::uint64_t>(out, dataset.records.size());
  for (const DatasetRecord& rec : dataset.records) {
    if (rec.readings.size() != reading_count || rec.labels.size() != label_count)
      throw DataError("dataset record does not match header dimensions");
    detail::put_le_array(out, rec.readings.data(), rec.readings.size());
    detail::put_le_array(out, rec.labels.data(), rec.labels.size());
  }
}

void write_dataset(std::span<const TrainingSample> samples, std::uint32_t sensors,
                   std::uint32_t window, const std::filesystem::path& path) {
  Dataset ds;
  ds.sensors = sensors;
  ds.window = window;
  ds.records.reserve(samples.size());
  for (const TrainingSample& s : samples) ds.records.push_back(to_record(s));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  write_dataset(ds, out);
  if (!out) throw DataError("write failed: " + path.string());
}

Dataset read_dataset(std::istream& in) {
  detail::expect_magic(in, kMagic);
  const auto version = detail::get_le<std::uint32_t>(in, "version");
  if (version != kVersion) throw DataError("unsupported version " + std::to_string(version));
  Dataset ds;
  ds.sensors = detail::get_le<std::uint32_t>(in, "sensor count");
  ds.window = detail::get_le<std::uint32_t>(in, "window length");
  const auto count = detail::get_le<std::uint64_t>(in, "sample count");
  if (ds.sensors == 0 || ds.window < 2) throw DataError("malformed header: empty dimensions");

  const std::size_t reading_count = std::size_t{ds.window} * ds.sensors * kReadingWidth;
  const std::size_t label_count = std::size_t{ds.sensors} * kLabelWidth;
  // `count` is untrusted until the payload has actually been read.
  ds.records.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 16)));
  for (std::uint64_t i = 0; i < count; ++i) {
    DatasetRecord rec;
    rec.readings.resize(reading_count);
    rec.labels.resize(label_count);
    const std::string where = "sample " + std::to_string(i);
    detail::get_le_array(in, rec.readings.data(), rec.readings.size(), where.c_str());
    detail::get_le_array(in, rec.labels.data(), rec.labels.size(), where.c_str());
    for (float v : rec.readings)
      if (!std::isfinite(v)) throw DataError(where + ": NaN or Inf in readings");
    for (float v : rec.labels)
      if (!std::isfinite(v)) throw DataError(where + ": NaN or Inf in labels");
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing file: " + path.string());
  try {
    return read_dataset(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace dyncal
