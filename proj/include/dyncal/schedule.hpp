#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dyncal/sensor_model.hpp"

namespace dyncal {

/// Ground-truth drift/offset trajectories for simulation.
///
/// Text form: "identity", or one or more terms separated by ';'
///
///   const:sensor=S,param=P,x=DEG,y=DEG,z=DEG
///   step:sensor=S,param=P,frame=F,axis=A,deg=DEG
///   ramp:sensor=S,param=P,axis=A,rate=DEG_PER_S[,start=F][,end=F]
///
/// S is a sensor index, "all" or "nonroot" (default nonroot); P is drift
/// (default) or offset; A is x, y or z. const uses the Rz*Ry*Rx Euler
/// convention and omitted angles are 0; a step is identity before frame F
/// and the given rotation from F on; a ramp accumulates
/// rate * (frame - start) / rate_hz degrees from `start` and holds its value
/// after `end`. Terms touching the same
/// sensor and parameter compose left to right.
class DriftSchedule {
 public:
  enum class Kind { kConstant, kStep, kRamp };
  enum class Param { kDrift, kOffset };
  static constexpr int kAllSensors = -1;
  static constexpr int kNonRootSensors = -2;

  struct Term {
    Kind kind = Kind::kConstant;
    int sensor = kNonRootSensors;
    Param param = Param::kDrift;
    EulerXYZ euler;  ///< const
    Eigen::Vector3d axis = Eigen::Vector3d::UnitY();
    double deg = 0.0;   ///< step
    double rate = 0.0;  ///< ramp, deg/s
    long start = 0;     ///< step frame / ramp start
    long end = -1;      ///< ramp end, -1 for none
  };

  static DriftSchedule identity() { return {}; }
  /// Throws ConfigError with the offending term on malformed input.
  static DriftSchedule parse(std::string_view text);

  void add(const Term& term) { terms_.push_back(term); }
  const std::vector<Term>& terms() const { return terms_; }

  /// Checks sensor indices and that every term starts within the motion.
  void validate(std::size_t sensors, std::size_t frames) const;

  /// True parameters at `frame`.
  CalibState at(long frame, double rate_hz, std::size_t sensors, int root_index) const;

 private:
  std::vector<Term> terms_;
};

}  // namespace dyncal
