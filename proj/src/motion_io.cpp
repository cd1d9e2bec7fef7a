#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dyncal/error.hpp"
#include "dyncal/io.hpp"

namespace dyncal {

namespace {

using nlohmann::json;

// Text files carry rounded values; anything within this distance of SO(3)
// is projected back onto it.
constexpr double kFileRotationTol = 1e-6;

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw DataError("line " + std::to_string(line) + ": " + msg);
}

double number(const json& v, std::size_t line, const char* field) {
  if (!v.is_number()) fail(line, std::string("field '") + field + "' must be numeric");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(line, std::string("field '") + field + "' is not finite");
  return d;
}

ImuFrame parse_frame(const std::string& text, std::size_t line) {
  json rec;
  try {
    rec = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(line, std::string("invalid JSON: ") + e.what());
  }
  if (!rec.is_object()) fail(line, "record must be an object");
  if (!rec.contains("t") || !rec["t"].is_number_integer()) fail(line, "missing integer field 't'");
  if (!rec.contains("sensors") || !rec["sensors"].is_array() || rec["sensors"].empty())
    fail(line, "missing non-empty array 'sensors'");

  ImuFrame frame;
  frame.t = rec["t"].get<long>();
  for (const json& s : rec["sensors"]) {
    if (!s.is_object() || !s.contains("R") || !s.contains("a")) fail(line, "sensor needs 'R' and 'a'");
    const json& r = s["R"];
    const json& a = s["a"];
    if (!r.is_array() || r.size() != 9) fail(line, "'R' must hold 9 numbers");
    if (!a.is_array() || a.size() != 3) fail(line, "'a' must hold 3 numbers");
    Eigen::Matrix3d m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = number(r[i], line, "R");
    SensorReading reading;
    const Rotation raw = Rotation::unchecked(m);
    if (raw.orthonormality_error() > kFileRotationTol) fail(line, "'R' is not a rotation matrix");
    reading.orientation = Rotation::nearest(m);
    for (int i = 0; i < 3; ++i) reading.accel[i] = number(a[i], line, "a");
    frame.sensors.push_back(reading);
  }
  return frame;
}

}  // namespace

MotionSequence read_motion(std::istream& in, double rate_hz) {
  MotionSequence seq;
  seq.rate_hz = rate_hz;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    ImuFrame frame = parse_frame(text, line);
    if (!seq.frames.empty()) {
      if (frame.sensor_count() != seq.frames.front().sensor_count())
        fail(line, "sensor count differs from the first frame");
      if (frame.t <= seq.frames.back().t) fail(line, "frame index is not increasing");
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

MotionSequence load_motion(const std::filesystem::path& path, double rate_hz) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file: " + path.string());
  try {
    return read_motion(in, rate_hz);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_motion(const MotionSequence& motion, std::ostream& out) {
  for (const ImuFrame& frame : motion.frames) {
    json rec;
    rec["t"] = frame.t;
    json sensors = json::array();
    for (const SensorReading& s : frame.sensors) {
      const auto rm = s.orientation.row_major();
      sensors.push_back({{"R", std::vector<double>(rm.begin(), rm.end())},
                         {"a", {s.accel.x(), s.accel.y(), s.accel.z()}}});
    }
    rec["sensors"] = std::move(sensors);
    out << rec.dump() << '\n';
  }
}

void save_motion(const MotionSequence& motion, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  write_motion(motion, out);
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace dyncal
