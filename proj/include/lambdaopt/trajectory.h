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

#ifndef LAMBDAOPT_TRAJECTORY_H_
#define LAMBDAOPT_TRAJECTORY_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lambdaopt/data.h"
#include "lambdaopt/lambda_tensor.h"

namespace lambdaopt {

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // population variance
};

struct GroupStat {
  std::size_t members = 0;
  MeanVar value;
};

// Snapshot of lambda aggregated per entity (over latent dimensions) and per
// frequency group (over the entity aggregates of its members).
struct TrajectoryRow {
  std::uint64_t step = 0;
  int epoch = 0;
  std::vector<MeanVar> users;
  std::vector<MeanVar> items;
  std::vector<GroupStat> user_groups;
  std::vector<GroupStat> item_groups;
  MeanVar all_users;
  MeanVar all_items;
};

MeanVar MeanAndVariance(std::span<const double> values);

TrajectoryRow RecordTrajectory(const LambdaTensor& lambda,
                               const GroupLabels& groups, std::uint64_t step,
                               int epoch);

// Sequence of snapshots over a run.
//
// CSV layout: step,entity_kind,entity_id_or_group,lambda_mean,lambda_var with
// entity_kind one of user, item, user_group, item_group, user_all, item_all.
// Groups without members are not written.
class LambdaTrajectory {
 public:
  void Append(TrajectoryRow row);

  const std::vector<TrajectoryRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }

  void WriteCsv(std::ostream& out) const;
  // (epoch, step) pairs, one per snapshot.
  void WriteIndexCsv(std::ostream& out) const;

 private:
  std::vector<TrajectoryRow> rows_;
};

}  // namespace lambdaopt

#endif  // LAMBDAOPT_TRAJECTORY_H_
