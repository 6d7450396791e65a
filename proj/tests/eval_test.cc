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

#include "lambdaopt/eval.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "lambdaopt/error.h"
#include "support/fixtures.h"
#include "support/oracle.h"

namespace lambdaopt {
namespace {

using testing::MakeSplit;
using testing::RandomSplit;
using testing::RandomTheta;

double BruteForceAuc(const std::vector<double>& pos,
                     const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  }
  return wins / static_cast<double>(pos.size() * neg.size());
}

TEST(AucFromScores, Examples) {
  EXPECT_EQ(AucFromScores(std::vector<double>{0.9}, std::vector<double>{0.1, 0.2}),
            1.0);
  EXPECT_EQ(AucFromScores(std::vector<double>{0.5}, std::vector<double>{0.5}),
            0.5);
  EXPECT_EQ(AucFromScores(std::vector<double>{0.3, 0.8},
                          std::vector<double>{0.5, 0.1}),
            0.75);
  EXPECT_TRUE(std::isnan(AucFromScores({}, std::vector<double>{1.0})));
}

TEST(AucFromScores, MatchesBruteForceWithTies) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> size(1, 100);
  std::uniform_int_distribution<int> coarse(0, 9);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> pos(size(rng)), neg(size(rng));
    for (double& v : pos) v = coarse(rng) * 0.1;
    for (double& v : neg) v = coarse(rng) * 0.1;
    EXPECT_NEAR(AucFromScores(pos, neg), BruteForceAuc(pos, neg), 1e-12);
  }
}

TEST(TopKFromRanks, Examples) {
  const std::size_t first[] = {1};
  EXPECT_EQ(TopKFromRanks(first, 10).hr, 1.0);
  EXPECT_EQ(TopKFromRanks(first, 10).ndcg, 1.0);
  const std::size_t outside[] = {11};
  EXPECT_EQ(TopKFromRanks(outside, 10).hr, 0.0);
  EXPECT_EQ(TopKFromRanks(outside, 10).ndcg, 0.0);
  const std::size_t two[] = {1, 3};
  EXPECT_EQ(TopKFromRanks(two, 10).hr, 1.0);
  EXPECT_DOUBLE_EQ(TopKFromRanks(two, 10).ndcg, 0.75);
  const std::size_t at_k[] = {10};
  EXPECT_EQ(TopKFromRanks(at_k, 10).hr, 1.0);
}

TEST(TopKFromRanks, MonotoneInKAndNdcgBelowHr) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> rank(1, 500);
  std::uniform_int_distribution<int> count(1, 5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::size_t> ranks(count(rng));
    for (auto& r : ranks) r = rank(rng);
    double hr = 0.0, ndcg = 0.0;
    for (std::size_t k : {1, 5, 10, 50, 100, 500}) {
      const TopK t = TopKFromRanks(ranks, k);
      EXPECT_GE(t.hr, hr);
      EXPECT_GE(t.ndcg, ndcg);
      EXPECT_LE(t.ndcg, t.hr + 1e-15);
      hr = t.hr;
      ndcg = t.ndcg;
    }
  }
}

TEST(RankUser, ExcludesAndBreaksTiesById) {
  const std::vector<double> scores = {0.5, 0.9, 0.5, 0.1, 0.7};
  const ItemId pos[] = {2};
  const ItemId excluded[] = {1};
  const auto r = RankUser(scores, pos, excluded);
  ASSERT_TRUE(r.has_value());
  // Candidates by rank: 4 (0.7), 0 (0.5), 2 (0.5), 3 (0.1).
  EXPECT_EQ(r->num_candidates, 4u);
  EXPECT_EQ(r->ranks[0], 3u);
  EXPECT_DOUBLE_EQ(r->auc, (1.0 + 0.5) / 3.0);
}

TEST(RankUser, NothingToRank) {
  const std::vector<double> scores = {0.5, 0.9};
  const ItemId pos[] = {0};
  const ItemId excluded[] = {1};
  EXPECT_FALSE(RankUser(scores, {}, excluded).has_value());
  EXPECT_FALSE(RankUser(scores, pos, excluded).has_value());
}

// Ranks by counting the candidates ahead of each positive, and AUC over all
// positive/negative pairs.
TEST(RankUser, MatchesBruteForceWithTiesAndExclusions) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> level(0, 5);
  std::bernoulli_distribution coin(0.25);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 40;
    std::vector<double> scores(n);
    for (double& s : scores) s = 0.25 * level(rng);
    std::vector<ItemId> pos, excluded;
    for (ItemId i = 0; i < n; ++i) {
      if (coin(rng)) pos.push_back(i);
      if (coin(rng)) excluded.push_back(i);
    }
    const auto r = RankUser(scores, pos, excluded);

    std::vector<ItemId> candidates;
    for (ItemId i = 0; i < n; ++i) {
      const bool is_pos = std::binary_search(pos.begin(), pos.end(), i);
      if (is_pos ||
          !std::binary_search(excluded.begin(), excluded.end(), i)) {
        candidates.push_back(i);
      }
    }
    if (pos.empty() || candidates.size() == pos.size()) {
      EXPECT_FALSE(r.has_value());
      continue;
    }
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(r->num_candidates, candidates.size());
    double wins = 0.0, pairs = 0.0;
    for (std::size_t j = 0; j < pos.size(); ++j) {
      const ItemId p = pos[j];
      std::size_t ahead = 0;
      for (ItemId c : candidates) {
        if (scores[c] > scores[p] || (scores[c] == scores[p] && c < p)) {
          ++ahead;
        }
        if (std::binary_search(pos.begin(), pos.end(), c)) continue;
        pairs += 1.0;
        if (scores[p] > scores[c]) wins += 1.0;
        if (scores[p] == scores[c]) wins += 0.5;
      }
      EXPECT_EQ(r->ranks[j], ahead + 1);
    }
    EXPECT_DOUBLE_EQ(r->auc, wins / pairs);
  }
}

TEST(RankUser, InvariantToMonotoneTransform) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> scores(60);
  for (double& s : scores) s = normal(rng);
  std::vector<double> transformed(scores.size());
  std::transform(scores.begin(), scores.end(), transformed.begin(),
                 [](double s) { return std::exp(3.0 * s) + 1.0; });
  const ItemId pos[] = {3, 17, 40};
  const ItemId excluded[] = {5, 6, 17};
  const auto a = RankUser(scores, pos, excluded);
  const auto b = RankUser(transformed, pos, excluded);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->ranks, b->ranks);
  EXPECT_EQ(a->auc, b->auc);
}

EmbeddingPair OneDim(const std::vector<double>& users,
                     const std::vector<double>& items) {
  EmbeddingPair t(users.size(), items.size(), 1);
  for (std::size_t u = 0; u < users.size(); ++u) t.users(u, 0) = users[u];
  for (std::size_t i = 0; i < items.size(); ++i) t.items(i, 0) = items[i];
  return t;
}

TEST(CorpusMetrics, PerfectAndWorstUsers) {
  // Item scores for u0 = item value; u1 sees them reversed.
  const EmbeddingPair t = OneDim({1.0, -1.0}, {0.1, 0.2, 0.3, 0.4, 0.5});
  const SplitDataset split =
      MakeSplit(5, {{0}, {0}}, {{1}, {2}}, {{4}, {4}});
  EvalOptions o;
  o.ks = {1, 3};
  const MetricReport r = CorpusMetrics(t, split, o);
  EXPECT_EQ(r.users_evaluated, 2u);
  // Test candidates exclude the user's own train and validation items:
  // {2, 3, 4} for u0 and {1, 3, 4} for u1.
  EXPECT_EQ(r.users[0].auc, 1.0);
  EXPECT_EQ(r.users[1].auc, 0.0);
  EXPECT_EQ(r.auc, 0.5);
  EXPECT_EQ(r.users[0].hr[0], 1.0);
  EXPECT_EQ(r.users[1].hr[0], 0.0);
  EXPECT_EQ(r.users[1].hr[1], 1.0);
  EXPECT_DOUBLE_EQ(r.users[1].ndcg[1], 0.5);
  EXPECT_EQ(r.Hr(1), 0.5);
  EXPECT_THROW(r.Hr(7), ConfigError);
  // Item 4 is held out by both users.
  EXPECT_EQ(r.items[4].users, 2u);
  EXPECT_EQ(r.items[4].hr[0], 0.5);
  EXPECT_EQ(r.items[0].users, 0u);

  o.target = EvalTarget::kValidation;
  const MetricReport v = CorpusMetrics(t, split, o);
  // Validation ranking excludes only train items.
  EXPECT_EQ(v.users[0].auc, 0.0);  // item 1 below 2, 3, 4
  EXPECT_EQ(v.users[1].auc, 2.0 / 3.0);
}

TEST(CorpusMetrics, ItemMetricModes) {
  const EmbeddingPair t = OneDim({1.0, 1.0}, {0.1, 0.2, 0.3, 0.4, 0.5});
  // u0 holds out items 4 and 1, u1 holds out item 1 only.
  const SplitDataset split = MakeSplit(5, {{0}, {0}}, {}, {{1, 4}, {1}});
  EvalOptions o;
  o.ks = {1};
  o.item_mode = ItemMetricMode::kItemHit;
  const MetricReport hit = CorpusMetrics(t, split, o);
  EXPECT_EQ(hit.items[4].hr[0], 1.0);
  EXPECT_EQ(hit.items[1].hr[0], 0.0);
  o.item_mode = ItemMetricMode::kUserAverage;
  const MetricReport avg = CorpusMetrics(t, split, o);
  // u0 HR@1 = 0.5, u1 HR@1 = 0.
  EXPECT_EQ(avg.items[4].hr[0], 0.5);
  EXPECT_EQ(avg.items[1].hr[0], 0.25);
}

TEST(CorpusMetrics, UsersWithoutHoldoutAreSkipped) {
  const EmbeddingPair t = OneDim({1.0, 1.0}, {0.1, 0.2, 0.3});
  const SplitDataset split = MakeSplit(3, {{0}, {0}}, {}, {{2}, {}});
  const MetricReport r = CorpusMetrics(t, split, {EvalTarget::kTest, {1}});
  EXPECT_EQ(r.users_evaluated, 1u);
  EXPECT_EQ(r.users_skipped, 1u);
  EXPECT_FALSE(r.users[1].evaluated);
  EXPECT_EQ(r.auc, 1.0);
}

TEST(CorpusMetrics, IdenticalUsersGetIdenticalMetrics) {
  std::mt19937_64 rng(4);
  EmbeddingPair t = RandomTheta(2, 30, 4, rng);
  for (std::size_t k = 0; k < 4; ++k) t.users(1, k) = t.users(0, k);
  const SplitDataset split =
      MakeSplit(30, {{0, 1, 2}, {0, 1, 2}}, {{3}, {3}}, {{7, 9}, {7, 9}});
  const MetricReport r = CorpusMetrics(t, split, {EvalTarget::kTest, {5}});
  EXPECT_EQ(r.users[0].auc, r.users[1].auc);
  EXPECT_EQ(r.users[0].ndcg, r.users[1].ndcg);
}

TEST(CorpusMetrics, RandomEmbeddingsGiveChanceAuc) {
  std::mt19937_64 rng(5);
  const SplitDataset split = RandomSplit(400, 300, 10, 6);
  const EmbeddingPair t = RandomTheta(400, 300, 8, rng);
  const MetricReport r = CorpusMetrics(t, split, {EvalTarget::kTest, {10}});
  EXPECT_NEAR(r.auc, 0.5, 0.05);
  EXPECT_NEAR(r.Hr(10), 10.0 / 289.0, 0.03);
}

TEST(CorpusMetrics, ThreadCountDoesNotChangeResults) {
  std::mt19937_64 rng(7);
  const SplitDataset split = RandomSplit(97, 120, 8, 8);
  const EmbeddingPair t = RandomTheta(97, 120, 6, rng);
  EvalOptions o;
  o.ks = {5, 20};
  const MetricReport one = CorpusMetrics(t, split, o);
  o.threads = 4;
  const MetricReport four = CorpusMetrics(t, split, o);
  EXPECT_EQ(one.auc, four.auc);
  EXPECT_EQ(one.hr, four.hr);
  EXPECT_EQ(one.ndcg, four.ndcg);
}

MetricReport UniformReport(std::size_t users, double hr) {
  MetricReport r;
  r.ks = {10};
  r.users.resize(users);
  for (UserMetrics& u : r.users) {
    u.evaluated = true;
    u.auc = 0.5;
    u.hr = {hr};
    u.ndcg = {hr / 2};
  }
  return r;
}

TEST(GroupImprovementReport, RelativeChangePerGroup) {
  GroupLabels g;
  g.users = {0, 0, 1};
  g.num_user_groups = 3;
  g.num_item_groups = 1;
  const MetricReport a = UniformReport(3, 0.5);
  MetricReport b = UniformReport(3, 0.5);
  b.users[0].hr = {0.55};
  b.users[1].hr = {0.55};
  const GroupReport rep = GroupImprovementReport(a, b, g);
  bool seen = false;
  for (const GroupDelta& d : rep.rows) {
    if (d.entity_kind == "user" && d.metric == "hr@10") {
      EXPECT_NEAR(d.relative_delta, d.group == 0 ? 0.1 : 0.0, 1e-12);
      seen = seen || d.group == 0;
    }
    if (d.metric == "auc") EXPECT_EQ(d.relative_delta, 0.0);
  }
  EXPECT_TRUE(seen);
  EXPECT_EQ(rep.notes.size(), 2u);  // user group 2 and item group 0
}

TEST(GroupImprovementReport, IdenticalReportsGiveZero) {
  GroupLabels g;
  g.users = {0, 1};
  g.num_user_groups = 2;
  const MetricReport a = UniformReport(2, 0.3);
  for (const GroupDelta& d : GroupImprovementReport(a, a, g).rows) {
    EXPECT_EQ(d.relative_delta, 0.0);
  }
}

TEST(GroupImprovementReport, RejectsMismatchedReports) {
  GroupLabels g;
  g.users = {0, 0};
  EXPECT_THROW(
      GroupImprovementReport(UniformReport(2, 0.1), UniformReport(3, 0.1), g),
      IncompatibleError);
  EXPECT_THROW(
      GroupImprovementReport(UniformReport(3, 0.1), UniformReport(3, 0.1), g),
      IncompatibleError);
}

TEST(SaveReport, RoundTrip) {
  std::mt19937_64 rng(9);
  const SplitDataset split = RandomSplit(20, 40, 5, 10);
  const EmbeddingPair t = RandomTheta(20, 40, 3, rng);
  const MetricReport r = CorpusMetrics(t, split, {EvalTarget::kTest, {5, 10}});
  const auto dir = std::filesystem::temp_directory_path() / "lambdaopt_report_test";
  std::filesystem::remove_all(dir);
  SaveReport(dir, r);
  const MetricReport back = LoadReport(dir);
  EXPECT_EQ(back.ks, r.ks);
  EXPECT_EQ(back.users_evaluated, r.users_evaluated);
  ASSERT_EQ(back.users.size(), r.users.size());
  for (std::size_t u = 0; u < r.users.size(); ++u) {
    EXPECT_EQ(back.users[u].evaluated, r.users[u].evaluated);
    EXPECT_EQ(back.users[u].auc, r.users[u].auc);
    EXPECT_EQ(back.users[u].hr, r.users[u].hr);
  }
  ASSERT_EQ(back.items.size(), r.items.size());
  for (std::size_t i = 0; i < r.items.size(); ++i) {
    EXPECT_EQ(back.items[i].users, r.items[i].users);
    EXPECT_EQ(back.items[i].ndcg, r.items[i].ndcg);
  }
  EXPECT_EQ(back.auc, r.auc);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace lambdaopt
