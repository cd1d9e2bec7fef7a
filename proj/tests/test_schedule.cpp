#include <gtest/gtest.h>

#include "dyncal/error.hpp"
#include "dyncal/schedule.hpp"
#include "test_expect.hpp"
#include "test_util.hpp"

using namespace dyncal;
using dyncal::test::frob;
using dyncal::test::throws_with;

TEST(Schedule, IdentityEverywhere) {
  for (const char* text : {"identity", "  identity ", ""}) {
    const DriftSchedule s = DriftSchedule::parse(text);
    EXPECT_TRUE(s.terms().empty());
    const CalibState st = s.at(1000, 30, 6, 5);
    for (const SensorCalib& c : st.sensors) {
      EXPECT_EQ(c.drift.matrix(), Eigen::Matrix3d::Identity());
      EXPECT_EQ(c.offset.matrix(), Eigen::Matrix3d::Identity());
    }
  }
}

TEST(Schedule, ConstantDefaultsToNonRootDrift) {
  const DriftSchedule s = DriftSchedule::parse("const:x=10,y=20,z=30");
  const CalibState st = s.at(0, 30, 6, 5);
  for (int k = 0; k < 5; ++k) EXPECT_LT(frob(st.sensors[k].drift, mat_from_euler({10, 20, 30})), 1e-12);
  EXPECT_EQ(st.sensors[5].drift.matrix(), Eigen::Matrix3d::Identity());
  for (const SensorCalib& c : st.sensors) EXPECT_EQ(c.offset.matrix(), Eigen::Matrix3d::Identity());
}

TEST(Schedule, OmittedConstantAnglesAreZero) {
  const DriftSchedule s = DriftSchedule::parse("const:sensor=0,y=30");
  EXPECT_LT(frob(s.at(0, 30, 6, 5).sensors[0].drift, Rotation::about_y(30)), 1e-12);
}

TEST(Schedule, StepSwitchesAtFrame) {
  const DriftSchedule s = DriftSchedule::parse("step:sensor=2,param=offset,frame=1000,axis=x,deg=-15");
  EXPECT_EQ(s.at(999, 30, 6, 5).sensors[2].offset.matrix(), Eigen::Matrix3d::Identity());
  EXPECT_LT(frob(s.at(1000, 30, 6, 5).sensors[2].offset, Rotation::about_x(-15)), 1e-12);
  EXPECT_LT(frob(s.at(5000, 30, 6, 5).sensors[2].offset, Rotation::about_x(-15)), 1e-12);
  EXPECT_EQ(s.at(5000, 30, 6, 5).sensors[3].offset.matrix(), Eigen::Matrix3d::Identity());
}

TEST(Schedule, RampAccumulatesAndHolds) {
  const DriftSchedule s = DriftSchedule::parse("ramp:sensor=all,axis=y,rate=0.07,start=30,end=930");
  EXPECT_LT(frob(s.at(0, 30, 6, 5).sensors[5].drift, Rotation()), 1e-15);
  EXPECT_NEAR(geodesic_deg(s.at(330, 30, 6, 5).sensors[5].drift, Rotation()), 0.7, 1e-12);
  EXPECT_NEAR(geodesic_deg(s.at(930, 30, 6, 5).sensors[0].drift, Rotation()), 2.1, 1e-12);
  EXPECT_NEAR(geodesic_deg(s.at(9000, 30, 6, 5).sensors[0].drift, Rotation()), 2.1, 1e-12);
  EXPECT_LT(frob(s.at(330, 30, 6, 5).sensors[1].drift, Rotation::about_y(0.7)), 1e-12);
}

TEST(Schedule, TermsComposeLeftToRight) {
  const DriftSchedule s = DriftSchedule::parse("const:sensor=0,x=20,y=0,z=0; step:sensor=0,frame=5,axis=z,deg=30");
  EXPECT_LT(frob(s.at(10, 30, 6, 5).sensors[0].drift, Rotation::about_x(20) * Rotation::about_z(30)), 1e-12);
  EXPECT_LT(frob(s.at(4, 30, 6, 5).sensors[0].drift, Rotation::about_x(20)), 1e-12);
  EXPECT_EQ(s.terms().size(), 2u);
}

TEST(Schedule, ProgrammaticTerms) {
  DriftSchedule s;
  DriftSchedule::Term t;
  t.kind = DriftSchedule::Kind::kStep;
  t.sensor = 5;
  t.axis = Eigen::Vector3d::UnitX();
  t.deg = 5;
  s.add(t);
  EXPECT_LT(frob(s.at(0, 30, 6, 5).sensors[5].drift, Rotation::about_x(5)), 1e-12);
}

TEST(Schedule, GrammarErrors) {
  auto bad = [](const char* text, const char* needle) {
    return throws_with<ConfigError>([text] { DriftSchedule::parse(text); }, needle);
  };
  EXPECT_TRUE(bad("wobble:x=1", "unknown kind 'wobble'"));
  EXPECT_TRUE(bad("step:frame=1,axis=x", "missing 'deg'"));
  EXPECT_TRUE(bad("ramp:axis=x", "missing 'rate'"));
  EXPECT_TRUE(bad("step:frame=1,axis=x,deg=1,color=red", "unknown key 'color'"));
  EXPECT_TRUE(bad("step:frame=1,axis=w,deg=1", "axis must be x, y or z"));
  EXPECT_TRUE(bad("ramp:axis=x,rate=1,start=10,end=5", "end precedes start"));
  EXPECT_TRUE(bad("step:frame=-3,axis=x,deg=1", "negative frame"));
  EXPECT_TRUE(bad("step:frame=1.5,axis=x,deg=1", "not an integer"));
  EXPECT_TRUE(bad("const:x=abc,y=0,z=0", "not a number"));
  EXPECT_TRUE(bad("const:param=bias,x=0,y=0,z=0", "param must be drift or offset"));
  EXPECT_TRUE(bad("const:x", "expected key=value"));
  EXPECT_TRUE(bad("const:x=1,y=2,z=3;identity", "schedule term 'identity'"));
}

TEST(Schedule, ValidationAgainstMotion) {
  EXPECT_TRUE(throws_with<ConfigError>(
      [] { DriftSchedule::parse("const:sensor=6,x=0,y=0,z=0").validate(6, 100); }, "sensor 6"));
  EXPECT_TRUE(throws_with<ConfigError>(
      [] { DriftSchedule::parse("step:frame=100,axis=x,deg=1").validate(6, 100); }, "frame 100"));
  EXPECT_NO_THROW(DriftSchedule::parse("step:frame=99,axis=x,deg=1").validate(6, 100));
}
