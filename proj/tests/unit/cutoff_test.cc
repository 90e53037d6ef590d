/* Copyright 2026 The Effbench Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include "checks.h"
#include "effbench/cutoff.h"
#include "effbench/sim_trainer.h"

namespace effbench {
namespace {

MeasurementSeries Series(std::initializer_list<double> metrics,
                         double epoch_step = 1.0) {
  MeasurementSeries s;
  double t = 0.0;
  double epoch = 0.0;
  for (double m : metrics) {
    t += 10.0;
    epoch += epoch_step;
    s.points.push_back({t, m, epoch, t + 1.0});
  }
  return s;
}

const TaskSpec kTask{"sst2", MetricKind::kAccuracy, 90.0, 5, 67349, 872};

TEST(DetectCrossing, ReturnsFirstPointAtOrAboveCutoff) {
  const auto c = DetectCrossing(Series({70, 89.99, 90.0, 95, 85}), kTask);
  ASSERT_TRUE(c);
  EXPECT_EQ(*c, (CrossingPoint{30.0, 90.0}));
}

TEST(DetectCrossing, NoneBelowCutoffOrEmpty) {
  EXPECT_FALSE(DetectCrossing(Series({10, 20, 89.9}), kTask));
  EXPECT_FALSE(DetectCrossing(MeasurementSeries{}, kTask));
}

TEST(DetectCrossing, NonMonotoneSeriesStillUsesFirstCrossing) {
  const auto c = DetectCrossing(Series({91, 50, 99}), kTask);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->elapsed_seconds, 10.0);
}

TEST(BudgetExhausted, RequiresFullBudgetWithoutCrossing) {
  EXPECT_TRUE(BudgetExhausted(Series({1, 2, 3, 4, 5}), kTask));
  EXPECT_FALSE(BudgetExhausted(Series({1, 2, 3, 4}), kTask));
  EXPECT_FALSE(BudgetExhausted(Series({1, 2, 3, 4, 95}), kTask));
  EXPECT_FALSE(BudgetExhausted(MeasurementSeries{}, kTask));
  EXPECT_TRUE(BudgetExhausted(Series({1, 2}, 3.0), kTask));
}

TEST(Smooth, ThreePointWindowMatchesHandComputedValues) {
  const MeasurementSeries s = Smooth(Series({10, 20, 60, 30, 50}));
  ASSERT_EQ(s.points.size(), 5u);
  EXPECT_DOUBLE_EQ(s.points[0].metric_value, 15.0);  // (10 + 20) / 2
  EXPECT_DOUBLE_EQ(s.points[1].metric_value, 30.0);  // (10 + 20 + 60) / 3
  EXPECT_DOUBLE_EQ(s.points[2].metric_value, 110.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.points[3].metric_value, 140.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.points[4].metric_value, 40.0);  // (30 + 50) / 2
  // Times and epochs are untouched.
  EXPECT_EQ(s.points[2].elapsed_seconds, 30.0);
  EXPECT_EQ(s.points[2].epoch_fraction, 3.0);
}

TEST(Smooth, EdgeCases) {
  EXPECT_TRUE(Smooth(MeasurementSeries{}).points.empty());
  EXPECT_DOUBLE_EQ(Smooth(Series({42})).points[0].metric_value, 42.0);
  const MeasurementSeries two = Smooth(Series({40, 80}));
  EXPECT_DOUBLE_EQ(two.points[0].metric_value, 60.0);
  EXPECT_DOUBLE_EQ(two.points[1].metric_value, 60.0);
  const MeasurementSeries five = Smooth(Series({0, 10, 20, 30, 40}), 5);
  EXPECT_DOUBLE_EQ(five.points[0].metric_value, 10.0);
  EXPECT_DOUBLE_EQ(five.points[2].metric_value, 20.0);
  EXPECT_EQ(Smooth(Series({1, 9, 1}), 1), Series({1, 9, 1}));
  EXPECT_THROW(Smooth(Series({1}), 2), UsageError);
  EXPECT_THROW(Smooth(Series({1}), 0), UsageError);
}

TEST(Smooth, PreservesConstantSeries) {
  const MeasurementSeries s = Smooth(Series({7, 7, 7, 7}));
  for (const auto& p : s.points) EXPECT_DOUBLE_EQ(p.metric_value, 7.0);
}

TEST(CutoffOracle, HundredRandomCurvesCrossWithinOneEvalInterval) {
  const auto failures = testing::CutoffOracleFailures(20260101, 100);
  for (const std::string& f : failures) ADD_FAILURE() << f;
}

TEST(CutoffOracle, WorkedExample) {
  CurveParams curve;  // m_inf 95, tau 100
  const double t_star = *AnalyticCrossingTime(curve, 90.0);
  EXPECT_NEAR(t_star, 294.4439, 1e-3);
  const TaskSpec task{"t", MetricKind::kAccuracy, 90.0, 5, 1, 1};
  const auto c =
      DetectCrossing(SimulateFinetuneSeries(curve, task, 100.0, 10.0), task);
  ASSERT_TRUE(c);
  EXPECT_DOUBLE_EQ(c->elapsed_seconds, 300.0);
}

TEST(CutoffOracle, UnreachableCutoffHasNoCrossing) {
  CurveParams curve;
  curve.m_inf = 85.0;
  EXPECT_FALSE(AnalyticCrossingTime(curve, 90.0));
  const TaskSpec task{"t", MetricKind::kAccuracy, 90.0, 5, 1, 1};
  const MeasurementSeries series =
      SimulateFinetuneSeries(curve, task, 1000.0, 10.0);
  EXPECT_FALSE(DetectCrossing(series, task));
  EXPECT_TRUE(BudgetExhausted(series, task));
  EXPECT_DOUBLE_EQ(series.points.back().epoch_fraction, 5.0);
}

}  // namespace
}  // namespace effbench
