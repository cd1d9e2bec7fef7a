#include "dyncal/schedule.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <string>

#include "dyncal/error.hpp"

namespace dyncal {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

double to_double(const std::string& v, const std::string& term) {
  double d = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("schedule term '" + term + "': '" + v + "' is not a number");
  return d;
}

long to_long(const std::string& v, const std::string& term) {
  long d = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("schedule term '" + term + "': '" + v + "' is not an integer");
  return d;
}

Eigen::Vector3d to_axis(const std::string& v, const std::string& term) {
  if (v == "x") return Eigen::Vector3d::UnitX();
  if (v == "y") return Eigen::Vector3d::UnitY();
  if (v == "z") return Eigen::Vector3d::UnitZ();
  throw ConfigError("schedule term '" + term + "': axis must be x, y or z");
}

bool applies(int term_sensor, std::size_t s, int root_index) {
  if (term_sensor == DriftSchedule::kAllSensors) return true;
  if (term_sensor == DriftSchedule::kNonRootSensors) return static_cast<int>(s) != root_index;
  return term_sensor == static_cast<int>(s);
}

}  // namespace

DriftSchedule DriftSchedule::parse(std::string_view text) {
  DriftSchedule sched;
  const std::string all = trim(text);
  if (all.empty() || all == "identity") return sched;

  for (const std::string& term_text : split(all, ';')) {
    if (term_text.empty()) continue;
    const auto colon = term_text.find(':');
    const std::string kind = term_text.substr(0, colon);
    Term term;
    if (kind == "const") term.kind = Kind::kConstant;
    else if (kind == "step") term.kind = Kind::kStep;
    else if (kind == "ramp") term.kind = Kind::kRamp;
    else throw ConfigError("schedule term '" + term_text + "': unknown kind '" + kind + "'");

    std::map<std::string, std::string> kv;
    if (colon != std::string::npos) {
      for (const std::string& item : split(std::string_view(term_text).substr(colon + 1), ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
          throw ConfigError("schedule term '" + term_text + "': expected key=value, got '" + item + "'");
        kv[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
      }
    }
    auto take = [&](const std::string& key) -> std::optional<std::string> {
      auto it = kv.find(key);
      if (it == kv.end()) return std::nullopt;
      std::string v = it->second;
      kv.erase(it);
      return v;
    };
    auto need = [&](const std::string& key) {
      auto v = take(key);
      if (!v) throw ConfigError("schedule term '" + term_text + "': missing '" + key + "'");
      return *v;
    };

    if (auto s = take("sensor")) {
      if (*s == "all") term.sensor = kAllSensors;
      else if (*s == "nonroot") term.sensor = kNonRootSensors;
      else term.sensor = static_cast<int>(to_long(*s, term_text));
      if (term.sensor < kNonRootSensors) throw ConfigError("schedule term '" + term_text + "': bad sensor");
    }
    if (auto p = take("param")) {
      if (*p == "drift") term.param = Param::kDrift;
      else if (*p == "offset") term.param = Param::kOffset;
      else throw ConfigError("schedule term '" + term_text + "': param must be drift or offset");
    }
    switch (term.kind) {
      case Kind::kConstant:
        term.euler.theta_x = to_double(take("x").value_or("0"), term_text);
        term.euler.theta_y = to_double(take("y").value_or("0"), term_text);
        term.euler.theta_z = to_double(take("z").value_or("0"), term_text);
        break;
      case Kind::kStep:
        term.start = to_long(need("frame"), term_text);
        term.axis = to_axis(need("axis"), term_text);
        term.deg = to_double(need("deg"), term_text);
        break;
      case Kind::kRamp:
        term.axis = to_axis(need("axis"), term_text);
        term.rate = to_double(need("rate"), term_text);
        term.start = to_long(take("start").value_or("0"), term_text);
        term.end = to_long(take("end").value_or("-1"), term_text);
        if (term.end >= 0 && term.end < term.start)
          throw ConfigError("schedule term '" + term_text + "': end precedes start");
        break;
    }
    if (term.start < 0) throw ConfigError("schedule term '" + term_text + "': negative frame");
    if (!kv.empty())
      throw ConfigError("schedule term '" + term_text + "': unknown key '" + kv.begin()->first + "'");
    sched.add(term);
  }
  return sched;
}

void DriftSchedule::validate(std::size_t sensors, std::size_t frames) const {
  for (const Term& t : terms_) {
    if (t.sensor >= static_cast<int>(sensors))
      throw ConfigError("schedule names sensor " + std::to_string(t.sensor) + " but the motion has " +
                        std::to_string(sensors));
    if (t.kind != Kind::kConstant && t.start >= static_cast<long>(frames))
      throw ConfigError("schedule term starts at frame " + std::to_string(t.start) +
                        " beyond the motion length " + std::to_string(frames));
  }
}

CalibState DriftSchedule::at(long frame, double rate_hz, std::size_t sensors, int root_index) const {
  CalibState st = CalibState::identity(sensors);
  for (const Term& t : terms_) {
    Rotation r;
    switch (t.kind) {
      case Kind::kConstant:
        r = mat_from_euler(t.euler);
        break;
      case Kind::kStep:
        if (frame >= t.start) r = Rotation::about_axis(t.axis, t.deg);
        break;
      case Kind::kRamp: {
        const long until = t.end >= 0 ? std::min(frame, t.end) : frame;
        const double elapsed = std::max(0L, until - t.start) / rate_hz;
        r = Rotation::about_axis(t.axis, t.rate * elapsed);
        break;
      }
    }
    for (std::size_t s = 0; s < sensors; ++s) {
      if (!applies(t.sensor, s, root_index)) continue;
      Rotation& target = t.param == Param::kDrift ? st.sensors[s].drift : st.sensors[s].offset;
      target = target * r;
    }
  }
  return st;
}

}  // namespace dyncal
