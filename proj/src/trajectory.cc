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

#include <ostream>
#include <stdexcept>

#include "lambdaopt/csv.h"

namespace lambdaopt {

MeanVar MeanAndVariance(std::span<const double> values) {
  MeanVar out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.var = sq / static_cast<double>(values.size());
  return out;
}

namespace {

template <class CoefFn>
std::vector<MeanVar> PerEntity(std::size_t rows, std::size_t dim,
                               CoefFn coef) {
  std::vector<MeanVar> out(rows);
  std::vector<double> buf(dim);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < dim; ++k) buf[k] = coef(r, k);
    out[r] = MeanAndVariance(buf);
  }
  return out;
}

std::vector<GroupStat> PerGroup(const std::vector<MeanVar>& entities,
                                const std::vector<int>& labels,
                                int num_groups) {
  std::vector<std::vector<double>> members(num_groups);
  for (std::size_t e = 0; e < entities.size() && e < labels.size(); ++e) {
    members[labels[e]].push_back(entities[e].mean);
  }
  std::vector<GroupStat> out(num_groups);
  for (int g = 0; g < num_groups; ++g) {
    out[g].members = members[g].size();
    out[g].value = MeanAndVariance(members[g]);
  }
  return out;
}

MeanVar OverAll(const std::vector<MeanVar>& entities) {
  std::vector<double> means;
  means.reserve(entities.size());
  for (const MeanVar& m : entities) means.push_back(m.mean);
  return MeanAndVariance(means);
}

}  // namespace

TrajectoryRow RecordTrajectory(const LambdaTensor& lambda,
                               const GroupLabels& groups, std::uint64_t step,
                               int epoch) {
  TrajectoryRow row;
  row.step = step;
  row.epoch = epoch;
  row.users = PerEntity(lambda.num_users(), lambda.dim(),
                        [&](std::size_t u, std::size_t k) {
                          return lambda.user_coef(u, k);
                        });
  row.items = PerEntity(lambda.num_items(), lambda.dim(),
                        [&](std::size_t i, std::size_t k) {
                          return lambda.item_coef(i, k);
                        });
  row.user_groups = PerGroup(row.users, groups.users, groups.num_user_groups);
  row.item_groups = PerGroup(row.items, groups.items, groups.num_item_groups);
  row.all_users = OverAll(row.users);
  row.all_items = OverAll(row.items);
  return row;
}

void LambdaTrajectory::Append(TrajectoryRow row) {
  if (!rows_.empty() && row.step < rows_.back().step) {
    throw std::invalid_argument("trajectory steps must be non-decreasing");
  }
  rows_.push_back(std::move(row));
}

void LambdaTrajectory::WriteCsv(std::ostream& out) const {
  out << "step,entity_kind,entity_id_or_group,lambda_mean,lambda_var\n";
  for (const TrajectoryRow& row : rows_) {
    auto line = [&](const char* kind, const std::string& id, const MeanVar& m) {
      out << row.step << ',' << kind << ',' << id << ','
          << FormatDouble(m.mean) << ',' << FormatDouble(m.var) << '\n';
    };
    line("user_all", "all", row.all_users);
    line("item_all", "all", row.all_items);
    for (std::size_t g = 0; g < row.user_groups.size(); ++g) {
      if (row.user_groups[g].members == 0) continue;
      line("user_group", std::to_string(g), row.user_groups[g].value);
    }
    for (std::size_t g = 0; g < row.item_groups.size(); ++g) {
      if (row.item_groups[g].members == 0) continue;
      line("item_group", std::to_string(g), row.item_groups[g].value);
    }
    for (std::size_t u = 0; u < row.users.size(); ++u) {
      line("user", std::to_string(u), row.users[u]);
    }
    for (std::size_t i = 0; i < row.items.size(); ++i) {
      line("item", std::to_string(i), row.items[i]);
    }
  }
}

void LambdaTrajectory::WriteIndexCsv(std::ostream& out) const {
  out << "epoch,step\n";
  for (const TrajectoryRow& row : rows_) {
    out << row.epoch << ',' << row.step << '\n';
  }
}

}  // namespace lambdaopt
