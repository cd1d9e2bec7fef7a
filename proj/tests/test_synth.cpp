#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dyncal/diversity.hpp"
#include "dyncal/error.hpp"
#include "dyncal/synth.hpp"
#include "test_util.hpp"

using namespace dyncal;
using dyncal::test::frob;

namespace {

// One-sample Kolmogorov-Smirnov statistic against U(lo, hi).
double ks_uniform(std::vector<double> x, double lo, double hi) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = (x[i] - lo) / (hi - lo);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

int rd_of(const MotionSequence& m, std::size_t start, std::size_t n, std::size_t sensor) {
  std::vector<Rotation> seq;
  for (std::size_t t = start; t < start + n; ++t) seq.push_back(m.frames[t].sensors[sensor].orientation);
  return rotation_diversity(seq);
}

}  // namespace

TEST(SampleParams, DefaultsMatchTrainingDistribution) {
  const ParamDistribution d;
  EXPECT_EQ(d.offset.x_lo, -45);
  EXPECT_EQ(d.offset.z_hi, 45);
  EXPECT_EQ(d.drift_root.y_lo, 0);
  EXPECT_EQ(d.drift_root.y_hi, 0);
  EXPECT_EQ(d.drift_root.x_hi, 20);
  EXPECT_EQ(d.drift_nonroot.y_hi, 60);
  EXPECT_EQ(d.drift_nonroot.z_lo, -20);
}

TEST(SampleParams, ZeroBoundsGiveIdentity) {
  for (bool root : {false, true}) {
    const SensorCalib p = sample_params(ParamDistribution::zero(), root, std::uint64_t{5});
    EXPECT_LT(frob(p.drift, Rotation()), 1e-15);
    EXPECT_LT(frob(p.offset, Rotation()), 1e-15);
  }
}

TEST(SampleParams, RootDriftHasNoYaw) {
  const ParamDistribution d;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const SensorCalib p = sample_params(d, true, seed);
    ASSERT_NEAR(euler_from_mat(p.drift).theta_y, 0.0, 1e-9);
  }
}

TEST(SampleParams, EulerDrawsAreUniformWithinBounds) {
  const AxisBounds b = AxisBounds::symmetric(45, 60, 20);
  std::mt19937_64 rng(11);
  const std::size_t n = 100000;
  std::vector<double> x(n), y(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const EulerXYZ e = sample_euler(b, rng);
    x[i] = e.theta_x, y[i] = e.theta_y, z[i] = e.theta_z;
  }
  EXPECT_GE(*std::min_element(x.begin(), x.end()), -45);
  EXPECT_LE(*std::max_element(x.begin(), x.end()), 45);
  EXPECT_GE(*std::min_element(y.begin(), y.end()), -60);
  EXPECT_LE(*std::max_element(y.begin(), y.end()), 60);
  EXPECT_GE(*std::min_element(z.begin(), z.end()), -20);
  EXPECT_LE(*std::max_element(z.begin(), z.end()), 20);
  // Asymptotic KS critical value at alpha = 0.01.
  const double crit = 1.6276 / std::sqrt(static_cast<double>(n));
  EXPECT_LT(ks_uniform(x, -45, 45), crit);
  EXPECT_LT(ks_uniform(y, -60, 60), crit);
  EXPECT_LT(ks_uniform(z, -20, 20), crit);
}

TEST(SampleParams, SampledAnglesSurviveMatrixRoundTrip) {
  const ParamDistribution d;
  std::mt19937_64 rng(12);
  for (int i = 0; i < 1000; ++i) {
    const SensorCalib p = sample_params(d, false, rng);
    const EulerXYZ e = euler_from_mat(p.drift);
    ASSERT_LE(std::abs(e.theta_x), 20 + 1e-9);
    ASSERT_LE(std::abs(e.theta_y), 60 + 1e-9);
    ASSERT_LE(std::abs(e.theta_z), 20 + 1e-9);
  }
}

TEST(SampleParams, InvalidBoundsRejected) {
  ParamDistribution d;
  d.offset.x_lo = 10;
  d.offset.x_hi = -10;
  EXPECT_THROW(d.validate(), ConfigError);
  ParamDistribution e;
  e.drift_nonroot.y_hi = 120;
  EXPECT_THROW(e.validate(), ConfigError);
}

TEST(GenMotion, Deterministic) {
  MotionSpec spec;
  spec.duration_s = 5;
  const MotionSequence a = gen_motion(spec, 3), b = gen_motion(spec, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t f = 0; f < a.size(); ++f)
    for (std::size_t s = 0; s < a.sensor_count(); ++s) {
      ASSERT_EQ(a.frames[f].sensors[s].orientation.matrix(), b.frames[f].sensors[s].orientation.matrix());
      ASSERT_EQ(a.frames[f].sensors[s].accel, b.frames[f].sensors[s].accel);
    }
  const MotionSequence c = gen_motion(spec, 4);
  EXPECT_NE(a.frames[10].sensors[0].orientation.matrix(), c.frames[10].sensors[0].orientation.matrix());
}

TEST(GenMotion, FrameCountAndValidity) {
  MotionSpec spec;
  spec.duration_s = 10;
  const MotionSequence m = gen_motion(spec, 1);
  EXPECT_EQ(m.size(), 300u);
  EXPECT_EQ(m.sensor_count(), 6u);
  for (std::size_t f = 0; f < m.size(); ++f) {
    ASSERT_EQ(m.frames[f].t, static_cast<long>(f));
    ASSERT_NO_THROW(validate_frame(m.frames[f]));
  }
}

TEST(GenMotion, ZeroAmplitudeIsConstant) {
  MotionSpec spec = MotionSpec::preset("static");
  spec.duration_s = 20;
  const MotionSequence m = gen_motion(spec, 2);
  for (std::size_t s = 0; s < 6; ++s) {
    EXPECT_EQ(rd_of(m, 0, m.size(), s), 1);
    EXPECT_LT(m.frames[100].sensors[s].accel.norm(), 1e-9);
  }
}

TEST(GenMotion, AccelerationIsSecondDifferenceOfEndpoints) {
  MotionSpec spec;
  spec.duration_s = 4;
  const MotionSequence m = gen_motion(spec, 9);
  const double h = 1.0 / spec.rate_hz;
  for (std::size_t f : {0u, 1u, 37u, 119u}) {
    const double t = f * h;
    const auto pm = sensor_positions(spec, 9, t - h), p0 = sensor_positions(spec, 9, t),
               pp = sensor_positions(spec, 9, t + h);
    for (std::size_t s = 0; s < 6; ++s) {
      const Eigen::Vector3d a = (pp[s] - 2 * p0[s] + pm[s]) / (h * h);
      EXPECT_LT((m.frames[f].sensors[s].accel - a).norm(), 1e-3);
    }
  }
}

TEST(GenMotion, StencilTracksTrueSecondDerivative) {
  // A 100x finer central difference approximates the analytic second
  // derivative; the 30 Hz stencil should agree to within a few percent.
  MotionSpec spec;
  spec.duration_s = 4;
  const MotionSequence m = gen_motion(spec, 9);
  const double h = 1.0 / spec.rate_hz, k = h / 100;
  for (std::size_t f : {20u, 50u, 90u}) {
    const double t = f * h;
    const auto pm = sensor_positions(spec, 9, t - k), p0 = sensor_positions(spec, 9, t),
               pp = sensor_positions(spec, 9, t + k);
    for (std::size_t s = 0; s < 6; ++s) {
      const Eigen::Vector3d fine = (pp[s] - 2 * p0[s] + pm[s]) / (k * k);
      EXPECT_LT((m.frames[f].sensors[s].accel - fine).norm(), 0.05 * fine.norm() + 0.05);
    }
  }
}

TEST(GenMotion, ActivePresetGivesHighLimbDiversity) {
  const MotionSequence m = gen_motion(MotionSpec::preset("active"), 1);
  for (std::size_t start = 0; start + 256 <= m.size(); start += 256)
    for (std::size_t s : {0u, 1u, 2u, 3u}) EXPECT_GE(rd_of(m, start, 256, s), 30) << "window " << start;
}

TEST(GenMotion, LimbDiversityExceedsHeadOnAverage) {
  double limb = 0, head = 0;
  int windows = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const MotionSequence m = gen_motion(MotionSpec::preset("active"), seed);
    for (std::size_t start = 0; start + 256 <= m.size(); start += 256, ++windows) {
      for (std::size_t s = 0; s < 4; ++s) limb += rd_of(m, start, 256, s) / 4.0;
      head += rd_of(m, start, 256, 4);
    }
  }
  EXPECT_GE(limb / windows, head / windows);
}

TEST(GenMotion, PresetsAndErrors) {
  EXPECT_LT(MotionSpec::preset("calm").amplitude_deg, MotionSpec::preset("active").amplitude_deg);
  EXPECT_THROW(MotionSpec::preset("sprint"), ConfigError);
  MotionSpec bad;
  bad.duration_s = 0;
  EXPECT_THROW(gen_motion(bad, 0), ConfigError);
}

TEST(MakeSample, ZeroDistributionCopiesGroundTruth) {
  MotionSpec spec;
  spec.duration_s = 12;
  const MotionSequence m = gen_motion(spec, 4);
  for (bool leak : {false, true}) {
    const TrainingSample s = make_sample(m, 17, ParamDistribution::zero(), 99, leak);
    ASSERT_EQ(s.window.size(), 256u);
    for (std::size_t t = 0; t < 256; ++t)
      for (std::size_t k = 0; k < 6; ++k) {
        ASSERT_EQ(s.window[t].sensors[k].orientation.matrix(), m.frames[17 + t].sensors[k].orientation.matrix());
        ASSERT_EQ(s.window[t].sensors[k].accel, m.frames[17 + t].sensors[k].accel);
      }
  }
}

TEST(MakeSample, LabelsInvertTheWindow) {
  MotionSpec spec;
  spec.duration_s = 12;
  const MotionSequence m = gen_motion(spec, 5);
  const TrainingSample s = make_sample(m, 40, ParamDistribution(), 7, false);
  CalibState st = CalibState::identity(6);
  st.sensors = s.params;
  for (std::size_t t = 0; t < s.window.size(); ++t) {
    const ImuFrame c = calibrate(s.window[t], st);
    for (std::size_t k = 0; k < 6; ++k) {
      ASSERT_LT(frob(c.sensors[k].orientation, m.frames[40 + t].sensors[k].orientation), 1e-9);
      ASSERT_LT((c.sensors[k].accel - m.frames[40 + t].sensors[k].accel).norm(), 1e-9);
    }
  }
  // Labels are the 6D encoding of the parameters.
  const auto d = s.drift_labels(), o = s.offset_labels();
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_LT(frob(mat_from_rot6d(d[k]), s.params[k].drift), 1e-12);
    EXPECT_LT(frob(mat_from_rot6d(o[k]), s.params[k].offset), 1e-12);
  }
  EXPECT_NEAR(euler_from_mat(s.params[5].drift).theta_y, 0.0, 1e-9);
}

TEST(MakeSample, SameSeedIsBitIdentical) {
  MotionSpec spec;
  spec.duration_s = 10;
  const MotionSequence m = gen_motion(spec, 6);
  const TrainingSample a = make_sample(m, 3, ParamDistribution(), 21, true);
  const TrainingSample b = make_sample(m, 3, ParamDistribution(), 21, true);
  for (std::size_t t = 0; t < 256; ++t)
    for (std::size_t k = 0; k < 6; ++k) {
      ASSERT_EQ(a.window[t].sensors[k].orientation.matrix(), b.window[t].sensors[k].orientation.matrix());
      ASSERT_EQ(a.window[t].sensors[k].accel, b.window[t].sensors[k].accel);
    }
}

TEST(MakeSample, OutOfRangeWindowThrows) {
  MotionSpec spec;
  spec.duration_s = 5;
  const MotionSequence m = gen_motion(spec, 6);
  EXPECT_THROW(make_sample(m, 0, ParamDistribution(), 1, false), DataError);
  EXPECT_NO_THROW(make_sample(m, 0, ParamDistribution(), 1, false, kDefaultRootIndex, 150));
  EXPECT_THROW(make_sample(m, 1, ParamDistribution(), 1, false, kDefaultRootIndex, 150), DataError);
}
