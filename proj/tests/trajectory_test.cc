/*
 * Copyright 2026 The lambdaopt Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lambdaopt/trajectory.h"

#include <gtest/gtest.h>

#include <sstream>

#include "support/fixtures.h"

namespace lambdaopt {
namespace {

TEST(MeanAndVariance, PopulationConvention) {
  const std::vector<double> v = {0.1, 0.3};
  const MeanVar m = MeanAndVariance(v);
  EXPECT_DOUBLE_EQ(m.mean, 0.2);
  EXPECT_NEAR(m.var, 0.01, 1e-17);
  EXPECT_EQ(MeanAndVariance({}).mean, 0.0);
}

GroupLabels TwoGroups() {
  GroupLabels g;
  g.users = {0, 1, 1};
  g.items = {0, 0};
  g.num_user_groups = 3;
  g.num_item_groups = 1;
  return g;
}

TEST(RecordTrajectory, ZeroLambdaAggregatesToZero) {
  const LambdaTensor l(Granularity::kDui, 3, 2, 2);
  const TrajectoryRow row = RecordTrajectory(l, TwoGroups(), 5, 1);
  for (const MeanVar& m : row.users) EXPECT_EQ(m.mean, 0.0);
  for (const MeanVar& m : row.items) EXPECT_EQ(m.mean, 0.0);
  EXPECT_EQ(row.all_users.mean, 0.0);
  EXPECT_EQ(row.user_groups[1].value.var, 0.0);
}

TEST(RecordTrajectory, EntityAndGroupAggregates) {
  LambdaTensor l(Granularity::kDui, 3, 2, 2);
  auto set = [&](std::size_t u, double a, double b) {
    l.values()[l.user_index(u, 0)] = a;
    l.values()[l.user_index(u, 1)] = b;
  };
  set(0, 0.2, 0.4);
  set(1, 0.1, 0.1);
  set(2, 0.2, 0.4);
  const TrajectoryRow row = RecordTrajectory(l, TwoGroups(), 7, 2);
  EXPECT_DOUBLE_EQ(row.users[0].mean, 0.3);
  EXPECT_NEAR(row.users[0].var, 0.01, 1e-17);
  // Group 1 = users {1, 2} with aggregates {0.1, 0.3}.
  EXPECT_EQ(row.user_groups[1].members, 2u);
  EXPECT_DOUBLE_EQ(row.user_groups[1].value.mean, 0.2);
  EXPECT_NEAR(row.user_groups[1].value.var, 0.01, 1e-17);
  EXPECT_EQ(row.user_groups[2].members, 0u);
  EXPECT_EQ(row.step, 7u);
  EXPECT_EQ(row.epoch, 2);
}

TEST(LambdaTrajectory, RejectsDecreasingSteps) {
  LambdaTrajectory t;
  const LambdaTensor l(Granularity::kGlobal, 3, 2, 2);
  t.Append(RecordTrajectory(l, TwoGroups(), 10, 1));
  t.Append(RecordTrajectory(l, TwoGroups(), 10, 1));
  EXPECT_THROW(t.Append(RecordTrajectory(l, TwoGroups(), 9, 2)),
               std::invalid_argument);
}

TEST(LambdaTrajectory, CsvLayout) {
  LambdaTrajectory t;
  std::ostringstream empty;
  t.WriteCsv(empty);
  EXPECT_EQ(empty.str(), "step,entity_kind,entity_id_or_group,lambda_mean,lambda_var\n");

  const LambdaTensor l(Granularity::kGlobal, 3, 2, 2, 0.5);
  t.Append(RecordTrajectory(l, TwoGroups(), 4, 1));
  std::ostringstream out;
  t.WriteCsv(out);
  const std::string expected =
      "step,entity_kind,entity_id_or_group,lambda_mean,lambda_var\n"
      "4,user_all,all,0.5,0\n"
      "4,item_all,all,0.5,0\n"
      "4,user_group,0,0.5,0\n"
      "4,user_group,1,0.5,0\n"
      "4,item_group,0,0.5,0\n"
      "4,user,0,0.5,0\n"
      "4,user,1,0.5,0\n"
      "4,user,2,0.5,0\n"
      "4,item,0,0.5,0\n"
      "4,item,1,0.5,0\n";
  EXPECT_EQ(out.str(), expected);
  std::ostringstream index;
  t.WriteIndexCsv(index);
  EXPECT_EQ(index.str(), "epoch,step\n1,4\n");
}

}  // namespace
}  // namespace lambdaopt
