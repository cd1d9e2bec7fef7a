#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dyncal/error.hpp"
#include "dyncal/sensor_model.hpp"
#include "test_util.hpp"

using namespace dyncal;
using namespace dyncal::test;

namespace {

constexpr double kG = 9.80665;

void expect_frames_near(const ImuFrame& a, const ImuFrame& b, double tol) {
  ASSERT_EQ(a.sensor_count(), b.sensor_count());
  for (std::size_t s = 0; s < a.sensor_count(); ++s) {
    EXPECT_LT(frob(a.sensors[s].orientation, b.sensors[s].orientation), tol);
    EXPECT_LT((a.sensors[s].accel - b.sensors[s].accel).norm(), tol);
  }
}

}  // namespace

TEST(MeasurementModel, IdentityStateIsExactNoOp) {
  std::mt19937_64 rng(1);
  const ImuFrame f = random_frame(rng, 6);
  for (bool leak : {false, true}) {
    const ImuFrame m = apply_measurement_model(f, CalibState::identity(6), leak);
    for (std::size_t s = 0; s < 6; ++s) {
      EXPECT_EQ(m.sensors[s].orientation.matrix(), f.sensors[s].orientation.matrix());
      EXPECT_EQ(m.sensors[s].accel, f.sensors[s].accel);
    }
  }
  const ImuFrame c = calibrate(f, CalibState::identity(6));
  for (std::size_t s = 0; s < 6; ++s) EXPECT_EQ(c.sensors[s].orientation.matrix(), f.sensors[s].orientation.matrix());
}

TEST(MeasurementModel, LeakageOfTiltedDriftAtRest) {
  ImuFrame f;
  f.sensors.push_back({Rotation(), Eigen::Vector3d::Zero()});
  CalibState st = CalibState::identity(1);
  st.sensors[0].drift = Rotation::about_x(10);
  const ImuFrame m = apply_measurement_model(f, st, true);
  // (I - Rx(10)) * (0, -g, 0) written out component by component.
  const double c = std::cos(10 * M_PI / 180), s = std::sin(10 * M_PI / 180);
  EXPECT_NEAR(m.sensors[0].accel.x(), 0.0, 1e-12);
  EXPECT_NEAR(m.sensors[0].accel.y(), -kG * (1 - c), 1e-12);
  EXPECT_NEAR(m.sensors[0].accel.z(), kG * s, 1e-12);
  EXPECT_LT((m.sensors[0].accel - gravity_leakage(st.sensors[0].drift)).norm(), 1e-15);
}

TEST(MeasurementModel, ComponentFormulas) {
  std::mt19937_64 rng(2);
  const ImuFrame f = random_frame(rng, 3);
  const CalibState st = random_state(rng, 3);
  const Eigen::Vector3d g(0, -kG, 0);
  const ImuFrame m0 = apply_measurement_model(f, st, false);
  const ImuFrame m1 = apply_measurement_model(f, st, true);
  for (std::size_t s = 0; s < 3; ++s) {
    const Eigen::Matrix3d d = st.sensors[s].drift.matrix(), o = st.sensors[s].offset.matrix();
    EXPECT_LT((m0.sensors[s].orientation.matrix() - d * f.sensors[s].orientation.matrix() * o).norm(), 1e-12);
    EXPECT_LT((m0.sensors[s].accel - d * f.sensors[s].accel).norm(), 1e-12);
    EXPECT_LT((m1.sensors[s].accel - (d * f.sensors[s].accel + (Eigen::Matrix3d::Identity() - d) * g)).norm(),
              1e-12);
  }
}

TEST(MeasurementModel, CalibrateInvertsWithoutLeakage) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const ImuFrame f = random_frame(rng, 6);
    const CalibState st = random_state(rng, 6);
    expect_frames_near(calibrate(apply_measurement_model(f, st, false), st), f, 1e-9);
  }
}

TEST(MeasurementModel, CalibrateWithLeakageLeavesResidual) {
  std::mt19937_64 rng(4);
  const ImuFrame f = random_frame(rng, 6);
  const CalibState st = random_state(rng, 6);
  const ImuFrame c = calibrate(apply_measurement_model(f, st, true), st);
  const Eigen::Vector3d g(0, -kG, 0);
  for (std::size_t s = 0; s < 6; ++s) {
    const Eigen::Matrix3d d = st.sensors[s].drift.matrix();
    EXPECT_LT(frob(c.sensors[s].orientation, f.sensors[s].orientation), 1e-9);
    const Eigen::Vector3d residual = d.transpose() * (Eigen::Matrix3d::Identity() - d) * g;
    EXPECT_LT((c.sensors[s].accel - f.sensors[s].accel - residual).norm(), 1e-9);
  }
}

TEST(MeasurementModel, AccelerationIgnoresOffset) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const ImuFrame f = random_frame(rng, 6);
    CalibState a = random_state(rng, 6);
    CalibState b = a;
    for (SensorCalib& c : b.sensors) c.offset = random_rotation(rng);
    for (bool leak : {false, true}) {
      const ImuFrame ma = apply_measurement_model(f, a, leak), mb = apply_measurement_model(f, b, leak);
      for (std::size_t s = 0; s < 6; ++s) ASSERT_EQ(ma.sensors[s].accel, mb.sensors[s].accel);
    }
  }
}

TEST(MeasurementModel, LeakageBoundedByDriftAngle) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    const Rotation d = random_small_rotation(rng, 20);
    const double angle = geodesic_deg(d, Rotation()) * M_PI / 180;
    const double leak = gravity_leakage(d).norm();
    ASSERT_LE(leak, kG * angle * std::sqrt(2.0) + 1e-12);
  }
  EXPECT_EQ(gravity_leakage(Rotation()).norm(), 0.0);
  // Pure yaw drift leaves gravity untouched.
  EXPECT_LT(gravity_leakage(Rotation::about_y(37)).norm(), 1e-12);
}

TEST(MeasurementModel, SensorCountMismatchThrows) {
  std::mt19937_64 rng(7);
  EXPECT_THROW(apply_measurement_model(random_frame(rng, 5), CalibState::identity(6), false), DataError);
  EXPECT_THROW(calibrate(random_frame(rng, 6), CalibState::identity(5)), DataError);
}

TEST(ExtractParams, IdentityWorld) {
  const SensorCalib p = extract_gt_params(Rotation(), Rotation(), Rotation());
  EXPECT_LT(frob(p.drift, Rotation()), 1e-15);
  EXPECT_LT(frob(p.offset, Rotation()), 1e-15);
}

TEST(ExtractParams, RecoversForwardModelParameters) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const Rotation d = random_rotation(rng), o = random_rotation(rng), pose = random_rotation(rng);
    const Rotation r_gs = pose * o;
    const Rotation r_imu = d * pose * o;
    const SensorCalib p = extract_gt_params(r_imu, r_gs, pose);
    ASSERT_LT(frob(p.drift, d), 1e-9);
    ASSERT_LT(frob(p.offset, o), 1e-9);
  }
}

TEST(ExtractParams, AlignedSensorHasNoOffset) {
  std::mt19937_64 rng(9);
  const Rotation pose = random_rotation(rng);
  EXPECT_LT(frob(extract_gt_params(random_rotation(rng), pose, pose).offset, Rotation()), 1e-12);
}

TEST(EgoYaw, IdentityRootLeavesFrameUnchanged) {
  std::mt19937_64 rng(10);
  ImuFrame f = random_frame(rng, 6);
  f.sensors[5].orientation = Rotation();
  const EgoYawFrame e = to_ego_yaw(f, 5);
  EXPECT_FALSE(e.yaw_indeterminate);
  expect_frames_near(e.frame, f, 1e-15);
}

TEST(EgoYaw, CommonHeadingRemoved) {
  ImuFrame f;
  for (int s = 0; s < 6; ++s) f.sensors.push_back({Rotation::about_y(25), Eigen::Vector3d(1, 0, 0)});
  const EgoYawFrame e = to_ego_yaw(f, 5);
  for (const SensorReading& r : e.frame.sensors) {
    EXPECT_LT(frob(r.orientation, Rotation()), 1e-12);
    EXPECT_LT((r.accel - Rotation::about_y(-25) * Eigen::Vector3d(1, 0, 0)).norm(), 1e-12);
  }
}

TEST(EgoYaw, RootHeadingIsZeroAfterMapping) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const ImuFrame f = random_frame(rng, 6);
    const EgoYawFrame e = to_ego_yaw(f, 5);
    if (e.yaw_indeterminate) continue;
    ASSERT_LT(frob(yaw_decompose(e.frame.sensors[5].orientation).yaw, Rotation()), 1e-9);
  }
}

TEST(EgoYaw, VerticalForwardAxisStillHasHeading) {
  ImuFrame f;
  f.sensors.push_back({Rotation::about_y(25) * Rotation::about_x(-90), Eigen::Vector3d::Zero()});
  const EgoYawFrame e = to_ego_yaw(f, 0);
  EXPECT_FALSE(e.yaw_indeterminate);
  EXPECT_LT(frob(e.root_yaw, Rotation::about_y(25)), 1e-12);
  EXPECT_THROW(to_ego_yaw(f, 1), DataError);
}

TEST(FrameValidation, RejectsBadFrames) {
  ImuFrame f;
  f.sensors.push_back({Rotation(), Eigen::Vector3d(0, 0, 250)});
  EXPECT_THROW(validate_frame(f), DataError);
  f.sensors[0].accel = Eigen::Vector3d(std::nan(""), 0, 0);
  EXPECT_THROW(validate_frame(f), DataError);
  f.sensors[0].accel = Eigen::Vector3d::Zero();
  f.sensors[0].orientation = Rotation::unchecked(Eigen::Matrix3d::Identity() * 1.1);
  EXPECT_THROW(validate_frame(f), DataError);
  f.sensors[0].orientation = Rotation();
  EXPECT_NO_THROW(validate_frame(f));
}
