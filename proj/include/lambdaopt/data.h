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

#ifndef LAMBDAOPT_DATA_H_
#define LAMBDAOPT_DATA_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lambdaopt/types.h"

namespace lambdaopt {

// One implicit-feedback observation.
struct Event {
  UserId user = 0;
  ItemId item = 0;
  std::int64_t timestamp = 0;

  bool operator==(const Event&) const = default;
};

// Deduplicated, densely indexed interaction corpus. `user_tokens[id]` and
// `item_tokens[id]` hold the raw identifiers.
struct InteractionLog {
  std::vector<Event> events;
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::vector<std::string> user_tokens;
  std::vector<std::string> item_tokens;
};

// Column mapping for delimited interaction files.
struct LogFormat {
  char delimiter = ',';
  bool header = false;
  std::size_t user_column = 0;
  std::size_t item_column = 1;
  std::size_t timestamp_column = 2;
};

// Reads (user, item, timestamp) rows. Tokens are re-indexed in order of first
// appearance and duplicate (user, item) pairs collapse onto the occurrence
// with the earliest timestamp (first one on ties).
InteractionLog LoadInteractions(const std::filesystem::path& path,
                                const LogFormat& format);
InteractionLog ReadInteractions(std::istream& in, const LogFormat& format);

// Iteratively drops users with fewer than `min_user` events and items with
// fewer than `min_item` events until nothing changes, then re-densifies ids
// keeping their relative order.
InteractionLog FilterMinCount(const InteractionLog& log, std::size_t min_user,
                              std::size_t min_item);

struct TimedItem {
  ItemId item = 0;
  std::int64_t timestamp = 0;

  bool operator==(const TimedItem&) const = default;
};

// Per-user chronological train/validation/test partition.
//
// Partition lists are in chronological order. The membership indexes are
// sorted item lists and the frequency tables count train events only.
struct SplitDataset {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::vector<std::vector<TimedItem>> train;
  std::vector<std::vector<TimedItem>> validation;
  std::vector<std::vector<TimedItem>> test;

  std::vector<std::vector<ItemId>> user_pos_train;
  std::vector<std::vector<ItemId>> user_pos_train_val;
  std::vector<std::size_t> user_frequency;
  std::vector<std::size_t> item_frequency;

  // Users whose validation or test partition came out empty.
  std::vector<UserId> users_without_holdout;

  bool InTrain(UserId u, ItemId i) const;
  bool InTrainOrValidation(UserId u, ItemId i) const;
  std::size_t NumTrain() const;
  std::size_t NumValidation() const;
  std::size_t NumTest() const;
  std::size_t NumInteractions() const {
    return NumTrain() + NumValidation() + NumTest();
  }
};

// Builds the membership indexes and frequency tables from the partitions.
SplitDataset MakeSplitDataset(std::size_t num_users, std::size_t num_items,
                              std::vector<std::vector<TimedItem>> train,
                              std::vector<std::vector<TimedItem>> validation,
                              std::vector<std::vector<TimedItem>> test);

struct SplitRatios {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
};

// Partition sizes for a user with n events: train takes ceil(train * n),
// validation ceil(validation * n) capped at what is left, test the rest.
std::array<std::size_t, 3> PartitionSizes(std::size_t n,
                                          const SplitRatios& ratios);

SplitDataset ChronologicalSplit(const InteractionLog& log,
                                const SplitRatios& ratios = {});

// Group index of an entity with frequency f is the number of boundaries <= f.
std::vector<int> FrequencyGroups(std::span<const std::size_t> frequencies,
                                 std::span<const std::size_t> boundaries);

struct GroupLabels {
  std::vector<int> users;
  std::vector<int> items;
  int num_user_groups = 1;
  int num_item_groups = 1;
};

GroupLabels MakeGroupLabels(const SplitDataset& split,
                            std::span<const std::size_t> user_boundaries,
                            std::span<const std::size_t> item_boundaries);

// Persisted form of an ingested corpus: users.csv / items.csv (token,id) and
// split.csv (user,partition,item,timestamp).
struct Manifest {
  SplitDataset split;
  std::vector<std::string> user_tokens;
  std::vector<std::string> item_tokens;
};

void SaveManifest(const std::filesystem::path& dir, const InteractionLog& log,
                  const SplitDataset& split);
Manifest LoadManifest(const std::filesystem::path& dir);

}  // namespace lambdaopt

#endif  // LAMBDAOPT_DATA_H_
