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

#ifndef LAMBDAOPT_EVAL_H_
#define LAMBDAOPT_EVAL_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lambdaopt/data.h"
#include "lambdaopt/mf.h"

namespace lambdaopt {

enum class EvalTarget {
  kTest,        // rank test items, excluding train and validation items
  kValidation,  // rank validation items, excluding train items
};

// Full-catalog ranking setup for one partition of a split.
class RankingContext {
 public:
  RankingContext(const SplitDataset& split, EvalTarget target);

  // Sorted held-out items of user u.
  std::vector<ItemId> Positives(UserId u) const;
  // Sorted items removed from u's candidate list.
  std::span<const ItemId> Excluded(UserId u) const;

  const SplitDataset& split() const { return split_; }

 private:
  const SplitDataset& split_;
  EvalTarget target_;
};

struct TopK {
  double hr = 0.0;
  double ndcg = 0.0;
};

// Ranking of one user's candidates, by score descending with ties broken by
// ascending item id.
struct UserRanking {
  double auc = 0.0;
  std::vector<ItemId> positives;
  std::vector<std::size_t> ranks;  // 1-based, aligned with `positives`
  std::size_t num_candidates = 0;
};

// Exact pairwise AUC (ties count one half) via one sort.
double AucFromScores(std::span<const double> positives,
                     std::span<const double> negatives);

// HR@k and NDCG@k (gain 1 / log2(rank + 1)) averaged over held-out items.
TopK TopKFromRanks(std::span<const std::size_t> ranks, std::size_t k);

// Ranks `scores` (indexed by item) for one user. Returns nothing when the
// user has no positives or no negative candidates.
std::optional<UserRanking> RankUser(std::span<const double> scores,
                                    std::span<const ItemId> positives,
                                    std::span<const ItemId> excluded);

std::optional<double> UserAuc(const EmbeddingPair& theta,
                              const RankingContext& context, UserId u);
std::optional<TopK> UserTopK(const EmbeddingPair& theta,
                             const RankingContext& context, UserId u,
                             std::size_t k);

// How an item's HR/NDCG is formed from the users holding it out.
enum class ItemMetricMode {
  kItemHit,      // the hit/gain of that item in each user's list
  kUserAverage,  // each such user's overall HR/NDCG
};

struct EvalOptions {
  EvalTarget target = EvalTarget::kTest;
  std::vector<std::size_t> ks = {50, 100};
  ItemMetricMode item_mode = ItemMetricMode::kUserAverage;
  std::size_t threads = 1;
};

struct UserMetrics {
  bool evaluated = false;
  double auc = 0.0;
  std::vector<double> hr;    // per k
  std::vector<double> ndcg;  // per k
};

struct ItemMetrics {
  std::size_t users = 0;  // users holding the item out; 0 = not reported
  std::vector<double> hr;
  std::vector<double> ndcg;
};

struct MetricReport {
  std::vector<std::size_t> ks;
  double auc = 0.0;
  std::vector<double> hr;
  std::vector<double> ndcg;
  std::size_t users_evaluated = 0;
  std::size_t users_skipped = 0;
  std::vector<UserMetrics> users;
  std::vector<ItemMetrics> items;

  double Hr(std::size_t k) const;
  double Ndcg(std::size_t k) const;
};

// Unweighted mean of per-user metrics over users with at least one held-out
// item, plus per-item metrics.
MetricReport CorpusMetrics(const EmbeddingPair& theta,
                           const SplitDataset& split,
                           const EvalOptions& options = {});

// Per-item HR/NDCG at a single cutoff.
std::vector<ItemMetrics> ItemMetricsAt(
    const EmbeddingPair& theta, const SplitDataset& split, std::size_t k,
    ItemMetricMode mode = ItemMetricMode::kUserAverage);

struct GroupDelta {
  std::string entity_kind;  // "user" or "item"
  std::string metric;       // e.g. "hr@100"
  int group = 0;
  std::size_t members = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double relative_delta = 0.0;  // (mean_b - mean_a) / mean_a
};

struct GroupReport {
  std::vector<GroupDelta> rows;
  std::vector<std::string> notes;
};

// Per frequency group relative change from report a to report b. Members are
// entities reported by both; empty groups are skipped with a note.
GroupReport GroupImprovementReport(const MetricReport& a,
                                   const MetricReport& b,
                                   const GroupLabels& groups);

// key=value summary, one metric per line.
void WriteReportSummary(std::ostream& out, const MetricReport& report);
// users.csv / items.csv / report.txt under `dir`.
void SaveReport(const std::filesystem::path& dir, const MetricReport& report);
MetricReport LoadReport(const std::filesystem::path& dir);

void WriteGroupReport(std::ostream& out, const GroupReport& report);

}  // namespace lambdaopt

#endif  // LAMBDAOPT_EVAL_H_
