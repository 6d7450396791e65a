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

#include "lambdaopt/data.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "lambdaopt/error.h"
#include "support/synthetic.h"

namespace lambdaopt {
namespace {

InteractionLog Read(const std::string& text, LogFormat fmt = {}) {
  std::istringstream in(text);
  return ReadInteractions(in, fmt);
}

TEST(ReadInteractions, CollapsesDuplicatesOntoEarliestTimestamp) {
  const InteractionLog log = Read("a,x,1\na,x,5\nb,y,2\n");
  EXPECT_EQ(log.num_users, 2u);
  EXPECT_EQ(log.num_items, 2u);
  ASSERT_EQ(log.events.size(), 2u);
  EXPECT_EQ(log.events[0], (Event{0, 0, 1}));
  EXPECT_EQ(log.events[1], (Event{1, 1, 2}));
  EXPECT_EQ(log.user_tokens, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(log.item_tokens, (std::vector<std::string>{"x", "y"}));
}

TEST(ReadInteractions, LaterDuplicateWithEarlierTimestampWins) {
  const InteractionLog log = Read("a,x,9\nb,y,2\na,x,3\n");
  ASSERT_EQ(log.events.size(), 2u);
  for (const Event& e : log.events) {
    if (e.user == 0) EXPECT_EQ(e.timestamp, 3);
  }
}

TEST(ReadInteractions, EmptyInputIsAnEmptyCorpus) {
  EXPECT_THROW(Read(""), EmptyCorpusError);
  LogFormat fmt;
  fmt.header = true;
  EXPECT_THROW(Read("user,item,time\n", fmt), EmptyCorpusError);
}

TEST(ReadInteractions, MalformedRowNamesItsLine) {
  try {
    Read("a,x,1\nb,y\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    Read("a,x,1\n\nb,y,notatime\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ReadInteractions, CustomColumnsHeaderAndDelimiter) {
  LogFormat fmt;
  fmt.delimiter = ';';
  fmt.header = true;
  fmt.user_column = 2;
  fmt.item_column = 0;
  fmt.timestamp_column = 1;
  const InteractionLog log = Read("item;time;user\nx;5;a\ny;6;a\n", fmt);
  EXPECT_EQ(log.num_users, 1u);
  EXPECT_EQ(log.num_items, 2u);
  EXPECT_EQ(log.events[1], (Event{0, 1, 6}));
}

TEST(FilterMinCount, ZeroThresholdsLeaveLogUnchanged) {
  const InteractionLog log = Read("a,x,1\nb,y,2\nb,x,3\n");
  const InteractionLog out = FilterMinCount(log, 0, 0);
  EXPECT_EQ(out.events, log.events);
  EXPECT_EQ(out.user_tokens, log.user_tokens);
  EXPECT_EQ(out.item_tokens, log.item_tokens);
}

TEST(FilterMinCount, DropsLightUserAndItsItems) {
  const InteractionLog log = Read("a,x,1\na,y,2\nb,w,3\na,z,4\n");
  const InteractionLog out = FilterMinCount(log, 2, 0);
  EXPECT_EQ(out.user_tokens, (std::vector<std::string>{"a"}));
  EXPECT_EQ(out.item_tokens, (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_EQ(out.events.size(), 3u);
}

TEST(FilterMinCount, CascadesToFixedPoint) {
  // d has one event; dropping it leaves z with one user, dropping z leaves c
  // with one event.
  const InteractionLog log =
      Read("a,x,1\na,y,2\nb,x,3\nb,y,4\nc,x,5\nc,z,6\nd,z,7\n");
  const InteractionLog out = FilterMinCount(log, 2, 2);
  EXPECT_EQ(out.user_tokens, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(out.item_tokens, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(out.num_users, 2u);
  EXPECT_EQ(out.num_items, 2u);
  for (const Event& e : out.events) {
    EXPECT_LT(e.user, out.num_users);
    EXPECT_LT(e.item, out.num_items);
  }
}

TEST(FilterMinCount, RemovingEverythingIsAnEmptyCorpus) {
  const InteractionLog log = Read("a,x,1\nb,y,2\n");
  EXPECT_THROW(FilterMinCount(log, 2, 2), EmptyCorpusError);
}

TEST(PartitionSizes, RoundsTrainAndValidationUp) {
  using A = std::array<std::size_t, 3>;
  EXPECT_EQ(PartitionSizes(10, {}), (A{6, 2, 2}));
  EXPECT_EQ(PartitionSizes(5, {}), (A{3, 1, 1}));
  EXPECT_EQ(PartitionSizes(21, {}), (A{13, 5, 3}));
  EXPECT_EQ(PartitionSizes(1, {}), (A{1, 0, 0}));
  EXPECT_EQ(PartitionSizes(2, {}), (A{2, 0, 0}));
  EXPECT_EQ(PartitionSizes(3, {}), (A{2, 1, 0}));
}

TEST(PartitionSizes, NeverEmptiesTrainOrOverflows) {
  for (std::size_t n = 1; n < 500; ++n) {
    const auto s = PartitionSizes(n, {});
    EXPECT_GE(s[0], 1u);
    EXPECT_EQ(s[0] + s[1] + s[2], n);
  }
}

TEST(ChronologicalSplit, RejectsBadRatios) {
  const InteractionLog log = Read("a,x,1\n");
  EXPECT_THROW(ChronologicalSplit(log, {0.5, 0.2, 0.2}), ConfigError);
  EXPECT_THROW(ChronologicalSplit(log, {0.0, 0.5, 0.5}), ConfigError);
}

TEST(ChronologicalSplit, TiesKeepInputOrder) {
  const InteractionLog log = Read("a,x,5\na,y,5\na,z,5\na,w,1\na,v,5\n");
  const SplitDataset s = ChronologicalSplit(log);
  // w (t=1) first, then x y z v in input order: 3 / 1 / 1.
  ASSERT_EQ(s.train[0].size(), 3u);
  EXPECT_EQ(s.train[0][0].item, 3u);
  EXPECT_EQ(s.train[0][1].item, 0u);
  EXPECT_EQ(s.train[0][2].item, 1u);
  EXPECT_EQ(s.validation[0][0].item, 2u);
  EXPECT_EQ(s.test[0][0].item, 4u);
}

TEST(ChronologicalSplit, ShortUsersAreFlagged) {
  const InteractionLog log = Read("a,x,1\na,y,2\nb,x,3\nb,y,4\nb,z,5\nb,w,6\nb,v,7\n");
  const SplitDataset s = ChronologicalSplit(log);
  EXPECT_EQ(s.users_without_holdout, (std::vector<UserId>{0}));
  EXPECT_EQ(s.train[0].size(), 2u);
}

TEST(ChronologicalSplit, PartitionsAreDisjointCompleteAndOrdered) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::ostringstream text;
    std::uniform_int_distribution<int> user(0, 9), item(0, 29), time(0, 50);
    for (int e = 0; e < 200; ++e) {
      text << 'u' << user(rng) << ",i" << item(rng) << ',' << time(rng) << '\n';
    }
    const InteractionLog log = Read(text.str());
    const SplitDataset s = ChronologicalSplit(log);
    std::vector<std::set<ItemId>> expected(log.num_users);
    for (const Event& e : log.events) expected[e.user].insert(e.item);
    for (std::size_t u = 0; u < log.num_users; ++u) {
      std::set<ItemId> seen;
      std::size_t total = 0;
      for (const auto* part : {&s.train[u], &s.validation[u], &s.test[u]}) {
        for (const TimedItem& t : *part) {
          seen.insert(t.item);
          ++total;
        }
      }
      EXPECT_EQ(seen, expected[u]);
      EXPECT_EQ(total, expected[u].size());
      const auto sizes = PartitionSizes(expected[u].size(), {});
      EXPECT_EQ(s.train[u].size(), sizes[0]);
      EXPECT_EQ(s.validation[u].size(), sizes[1]);
      auto max_ts = [](const std::vector<TimedItem>& v) {
        std::int64_t m = INT64_MIN;
        for (const auto& t : v) m = std::max(m, t.timestamp);
        return m;
      };
      auto min_ts = [](const std::vector<TimedItem>& v) {
        std::int64_t m = INT64_MAX;
        for (const auto& t : v) m = std::min(m, t.timestamp);
        return m;
      };
      EXPECT_LE(max_ts(s.train[u]), min_ts(s.validation[u]));
      EXPECT_LE(max_ts(s.validation[u]), min_ts(s.test[u]));
      EXPECT_LE(max_ts(s.train[u]), min_ts(s.test[u]));
      EXPECT_EQ(s.user_frequency[u], s.train[u].size());
      for (const TimedItem& t : s.train[u]) {
        EXPECT_TRUE(s.InTrain(UserId(u), t.item));
        EXPECT_TRUE(s.InTrainOrValidation(UserId(u), t.item));
      }
      for (const TimedItem& t : s.validation[u]) {
        EXPECT_FALSE(s.InTrain(UserId(u), t.item));
        EXPECT_TRUE(s.InTrainOrValidation(UserId(u), t.item));
      }
      for (const TimedItem& t : s.test[u]) {
        EXPECT_FALSE(s.InTrainOrValidation(UserId(u), t.item));
      }
    }
    std::size_t item_total = 0;
    for (std::size_t f : s.item_frequency) item_total += f;
    EXPECT_EQ(item_total, s.NumTrain());
  }
}

TEST(FrequencyGroups, CountsBoundariesAtOrBelow) {
  const std::vector<std::size_t> bounds = {15, 30, 60};
  const std::vector<std::size_t> freqs = {10, 15, 45, 100, 14};
  EXPECT_EQ(FrequencyGroups(freqs, bounds), (std::vector<int>{0, 1, 2, 3, 0}));
  EXPECT_EQ(FrequencyGroups(freqs, {}), (std::vector<int>{0, 0, 0, 0, 0}));
}

TEST(FrequencyGroups, RejectsUnsortedBoundaries) {
  const std::vector<std::size_t> freqs = {1};
  const std::vector<std::size_t> bad = {30, 15};
  const std::vector<std::size_t> dup = {15, 15};
  EXPECT_THROW(FrequencyGroups(freqs, bad), ConfigError);
  EXPECT_THROW(FrequencyGroups(freqs, dup), ConfigError);
}

TEST(Manifest, RoundTripsExactly) {
  testing::SyntheticShape shape;
  shape.users = 30;
  shape.items = 40;
  shape.max_events = 15;
  const InteractionLog log = FilterMinCount(testing::SyntheticLog(shape), 3, 1);
  const SplitDataset split = ChronologicalSplit(log);
  const auto dir = std::filesystem::temp_directory_path() / "lambdaopt_manifest";
  std::filesystem::remove_all(dir);
  SaveManifest(dir, log, split);
  const Manifest m = LoadManifest(dir);
  EXPECT_EQ(m.user_tokens, log.user_tokens);
  EXPECT_EQ(m.item_tokens, log.item_tokens);
  EXPECT_EQ(m.split.num_users, split.num_users);
  EXPECT_EQ(m.split.num_items, split.num_items);
  EXPECT_EQ(m.split.train, split.train);
  EXPECT_EQ(m.split.validation, split.validation);
  EXPECT_EQ(m.split.test, split.test);
  EXPECT_EQ(m.split.item_frequency, split.item_frequency);
  EXPECT_EQ(m.split.user_pos_train_val, split.user_pos_train_val);
  std::filesystem::remove_all(dir);
}

TEST(Ingestion, IsDeterministic) {
  testing::SyntheticShape shape;
  shape.users = 50;
  std::ostringstream text;
  testing::WriteLogCsv(text, testing::SyntheticLog(shape));
  const SplitDataset a = ChronologicalSplit(FilterMinCount(Read(text.str()), 5, 2));
  const SplitDataset b = ChronologicalSplit(FilterMinCount(Read(text.str()), 5, 2));
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_EQ(a.test, b.test);
}

}  // namespace
}  // namespace lambdaopt
