#include <gtest/gtest.h>

#include <evac/scheduler.hpp>

#include <stdexcept>

#include "support.hpp"

using namespace evac;

namespace {

ContinuityInputs inputs(double t_f, double l_s, double c_s, double v_f, double c_f) {
  ContinuityInputs in;
  in.t_f = t_f;
  in.l_s = l_s;
  in.c_s = c_s;
  in.v_f = v_f;
  in.c_f = c_f;
  return in;
}

}  // namespace

TEST(StaircaseSpeed, Examples) {
  EXPECT_EQ(staircase_speed(1.0, 1.2, 1.2), 1.0);
  EXPECT_EQ(staircase_speed(1.0, 1.2, 2.4), 0.5);
  EXPECT_EQ(staircase_speed(1.5, 2.0, 1.0), 3.0);
}

TEST(StaircaseSpeed, RejectsNonPositiveInputs) {
  EXPECT_THROW(staircase_speed(0.0, 1.2, 1.2), std::domain_error);
  EXPECT_THROW(staircase_speed(1.0, -1.0, 1.2), std::domain_error);
  EXPECT_THROW(staircase_speed(1.0, 1.2, 0.0), std::domain_error);
}

TEST(StaircaseSpeed, ContinuityHoldsToMachinePrecision) {
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    const double v_f = rng.uniform(0.1, 3.0), c_f = rng.uniform(0.5, 4.0), c_s = rng.uniform(0.5, 4.0);
    const double v_s = staircase_speed(v_f, c_f, c_s);
    EXPECT_NEAR(v_s * c_s, v_f * c_f, 4e-16 * v_f * c_f);
  }
}

TEST(TransitTime, Examples) {
  EXPECT_EQ(staircase_transit_time(12.0, 1.5), 8.0);
  EXPECT_EQ(staircase_transit_time(0.0, 1.5), 0.0);
  EXPECT_THROW(staircase_transit_time(12.0, 0.0), std::domain_error);
  EXPECT_THROW(staircase_transit_time(-1.0, 1.0), std::domain_error);
}

TEST(TimeShift, Examples) {
  const TimeShift a = compute_time_shift(inputs(30, 10, 1.2, 1.0, 1.2));
  EXPECT_EQ(a.delta_t, 20.0);
  EXPECT_EQ(a.t_s, 10.0);
  EXPECT_FALSE(a.clamped);

  const TimeShift b = compute_time_shift(inputs(10, 20, 1, 2, 1));
  EXPECT_EQ(b.delta_t, 0.0);
  EXPECT_EQ(b.t_s, 10.0);
  EXPECT_FALSE(b.clamped);

  const TimeShift c = compute_time_shift(inputs(5, 20, 2, 1, 1));
  EXPECT_EQ(c.raw, -35.0);
  EXPECT_EQ(c.delta_t, 0.0);
  EXPECT_TRUE(c.clamped);
}

TEST(TimeShift, NarrowerStaircaseWarns) {
  EXPECT_TRUE(compute_time_shift(inputs(30, 10, 1.0, 1.0, 1.2)).narrowing_warning);
  EXPECT_FALSE(compute_time_shift(inputs(30, 10, 1.2, 1.0, 1.2)).narrowing_warning);
}

TEST(TimeShift, RejectsInvalidInputs) {
  EXPECT_THROW(compute_time_shift(inputs(30, 10, 1.2, 0.0, 1.2)), std::domain_error);
  EXPECT_THROW(compute_time_shift(inputs(30, 0.0, 1.2, 1.0, 1.2)), std::domain_error);
  EXPECT_THROW(compute_time_shift(inputs(-1, 10, 1.2, 1.0, 1.2)), std::domain_error);
}

TEST(TimeShift, ShiftPlusTransitIsFloorTime) {
  Rng rng(2);
  int unclamped = 0;
  for (int k = 0; k < 1000; ++k) {
    const ContinuityInputs in = inputs(rng.uniform(0, 120), rng.uniform(0.5, 30), rng.uniform(0.5, 4),
                                       rng.uniform(0.2, 2.5), rng.uniform(0.5, 4));
    const TimeShift s = compute_time_shift(in);
    const double t_s = staircase_transit_time(in.l_s, staircase_speed(in.v_f, in.c_f, in.c_s));
    EXPECT_EQ(s.t_s, t_s);
    if (s.clamped) {
      EXPECT_EQ(s.delta_t, 0.0);
      EXPECT_GT(t_s, in.t_f);
      continue;
    }
    ++unclamped;
    EXPECT_NEAR(s.delta_t + t_s, in.t_f, 4 * std::numeric_limits<double>::epsilon() * in.t_f);
  }
  EXPECT_GT(unclamped, 500);
}

TEST(TimeShift, ScalingBothWidthsLeavesShiftUnchanged) {
  Rng rng(4);
  for (int k = 0; k < 200; ++k) {
    ContinuityInputs in = inputs(rng.uniform(0, 120), rng.uniform(0.5, 30), rng.uniform(0.5, 4),
                                 rng.uniform(0.2, 2.5), rng.uniform(0.5, 4));
    const double before = compute_time_shift(in).delta_t;
    in.c_s *= 2;
    in.c_f *= 2;
    EXPECT_DOUBLE_EQ(compute_time_shift(in).delta_t, before);
  }
}

TEST(Schedule, Examples) {
  EXPECT_EQ(build_schedule(20, 3, ScheduleMode::Staggered).floor_start_times,
            (std::vector<double>{0, 20, 40}));
  EXPECT_EQ(build_schedule(20, 3, ScheduleMode::Simultaneous).floor_start_times,
            (std::vector<double>{0, 0, 0}));
  const Schedule unit = build_schedule(17.25, 2, ScheduleMode::Staggered);
  EXPECT_EQ(unit.floor_start_times, (std::vector<double>{0, 17.25}));
  EXPECT_EQ(unit.delta_t, 17.25);
}

TEST(Schedule, StartsAtZeroAndNeverDecreases) {
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    const int floors = 2 + static_cast<int>(rng.below(20));
    const Schedule s = build_schedule(rng.uniform(0, 60), floors, ScheduleMode::Staggered);
    ASSERT_EQ(s.floor_start_times.size(), static_cast<std::size_t>(floors));
    EXPECT_EQ(s.floor_start_times[0], 0.0);
    EXPECT_TRUE(std::is_sorted(s.floor_start_times.begin(), s.floor_start_times.end()));
  }
}

TEST(Schedule, RejectsBadArguments) {
  EXPECT_THROW(build_schedule(-1, 2, ScheduleMode::Staggered), std::invalid_argument);
  EXPECT_THROW(build_schedule(1, 1, ScheduleMode::Staggered), std::invalid_argument);
}

class CalibrationTest : public ::testing::Test {
 protected:
  // 1.2 m exit on the right wall, rows 7..10.
  FloorPlan plan = floor_from_grid(test::walled_room(30, 17, 7, 4), 0);
  CalibrationConfig config;
};

TEST_F(CalibrationTest, NoAgentsReportsNoSamples) {
  const Calibration c = calibrate_floor(plan, config, 1);
  EXPECT_EQ(c.t_f, 0.0);
  EXPECT_EQ(c.v_f, config.agents.base.desired_speed);
  EXPECT_TRUE(c.no_samples);
}

TEST_F(CalibrationTest, OneAgentThreeMetresOut) {
  const Calibration c =
      calibrate_floor(plan, config, {test::active_agent(0, {8.7 - 3.0, 2.7})}, 1);
  EXPECT_GE(c.t_f, 2.0);
  EXPECT_LE(c.t_f, 3.0);
  EXPECT_GE(c.v_f, 1.3);
  EXPECT_LE(c.v_f, 1.5);
  EXPECT_EQ(c.samples, 1);
}

TEST_F(CalibrationTest, SameSeedSameResult) {
  plan.initial_agent_count = 25;
  const Calibration a = calibrate_floor(plan, config, 8);
  const Calibration b = calibrate_floor(plan, config, 8);
  EXPECT_EQ(a.t_f, b.t_f);
  EXPECT_EQ(a.v_f, b.v_f);
  EXPECT_EQ(a.samples, 25);
}

TEST_F(CalibrationTest, TimeLimitRaises) {
  plan.initial_agent_count = 25;
  config.t_max = 1.0;
  EXPECT_THROW(calibrate_floor(plan, config, 8), CalibrationError);
}
