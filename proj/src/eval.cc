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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <thread>

#include "lambdaopt/csv.h"
#include "lambdaopt/error.h"

namespace lambdaopt {

RankingContext::RankingContext(const SplitDataset& split, EvalTarget target)
    : split_(split), target_(target) {}

std::vector<ItemId> RankingContext::Positives(UserId u) const {
  const auto& part =
      target_ == EvalTarget::kTest ? split_.test[u] : split_.validation[u];
  std::vector<ItemId> items;
  items.reserve(part.size());
  for (const TimedItem& t : part) items.push_back(t.item);
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

std::span<const ItemId> RankingContext::Excluded(UserId u) const {
  return target_ == EvalTarget::kTest ? split_.user_pos_train_val[u]
                                      : split_.user_pos_train[u];
}

double AucFromScores(std::span<const double> positives,
                     std::span<const double> negatives) {
  if (positives.empty() || negatives.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  // (score, is_positive) sorted by score descending.
  std::vector<std::pair<double, bool>> all;
  all.reserve(positives.size() + negatives.size());
  for (double s : positives) all.emplace_back(s, true);
  for (double s : negatives) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  double wins = 0.0;
  double pos_above = 0.0;
  for (std::size_t g = 0; g < all.size();) {
    std::size_t end = g;
    double pos = 0.0;
    double neg = 0.0;
    while (end < all.size() && all[end].first == all[g].first) {
      (all[end].second ? pos : neg) += 1.0;
      ++end;
    }
    wins += neg * pos_above + 0.5 * pos * neg;
    pos_above += pos;
    g = end;
  }
  return wins / (static_cast<double>(positives.size()) *
                 static_cast<double>(negatives.size()));
}

TopK TopKFromRanks(std::span<const std::size_t> ranks, std::size_t k) {
  TopK out;
  if (ranks.empty()) return out;
  for (std::size_t r : ranks) {
    if (r <= k) {
      out.hr += 1.0;
      out.ndcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
    }
  }
  out.hr /= static_cast<double>(ranks.size());
  out.ndcg /= static_cast<double>(ranks.size());
  return out;
}

std::optional<UserRanking> RankUser(std::span<const double> scores,
                                    std::span<const ItemId> positives,
                                    std::span<const ItemId> excluded) {
  if (positives.empty()) return std::nullopt;
  std::vector<ItemId> candidates;
  candidates.reserve(scores.size());
  std::size_t ex = 0;
  for (ItemId i = 0; i < scores.size(); ++i) {
    while (ex < excluded.size() && excluded[ex] < i) ++ex;
    const bool is_excluded = ex < excluded.size() && excluded[ex] == i;
    if (!is_excluded ||
        std::binary_search(positives.begin(), positives.end(), i)) {
      candidates.push_back(i);
    }
  }
  if (candidates.size() <= positives.size()) return std::nullopt;

  // Positives in ranking order; every other candidate is located among them
  // by binary search instead of sorting the whole candidate list.
  const auto ahead = [&](ItemId a, ItemId b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::vector<ItemId> ordered(positives.begin(), positives.end());
  std::sort(ordered.begin(), ordered.end(), ahead);
  std::vector<double> pos_scores(ordered.size());
  for (std::size_t j = 0; j < ordered.size(); ++j) {
    pos_scores[j] = scores[ordered[j]];
  }
  std::reverse(pos_scores.begin(), pos_scores.end());  // ascending

  // negatives_before[j]: negatives ranked between positives j-1 and j.
  std::vector<std::size_t> negatives_before(ordered.size() + 1, 0);
  double wins = 0.0;
  for (ItemId c : candidates) {
    if (std::binary_search(positives.begin(), positives.end(), c)) continue;
    const auto pos_ahead =
        std::lower_bound(ordered.begin(), ordered.end(), c, ahead) -
        ordered.begin();
    ++negatives_before[pos_ahead];
    const double s = scores[c];
    const auto lo = std::lower_bound(pos_scores.begin(), pos_scores.end(), s);
    const auto hi = std::upper_bound(lo, pos_scores.end(), s);
    wins += static_cast<double>(pos_scores.end() - hi) +
            0.5 * static_cast<double>(hi - lo);
  }

  UserRanking out;
  out.num_candidates = candidates.size();
  out.positives.assign(positives.begin(), positives.end());
  out.ranks.assign(positives.size(), 0);
  const double num_pos = static_cast<double>(positives.size());
  const double num_neg = static_cast<double>(candidates.size()) - num_pos;
  std::size_t negatives_ahead = 0;
  for (std::size_t j = 0; j < ordered.size(); ++j) {
    negatives_ahead += negatives_before[j];
    const auto it =
        std::lower_bound(positives.begin(), positives.end(), ordered[j]);
    out.ranks[it - positives.begin()] = j + negatives_ahead + 1;
  }
  out.auc = wins / (num_pos * num_neg);
  return out;
}

namespace {

std::vector<double> ScoreAll(const EmbeddingPair& theta, UserId u) {
  std::vector<double> scores(theta.num_items());
  const auto wu = theta.user_row(u);
  for (ItemId i = 0; i < theta.num_items(); ++i) {
    scores[i] = Dot(wu, theta.item_row(i));
  }
  return scores;
}

std::optional<UserRanking> RankWithContext(const EmbeddingPair& theta,
                                           const RankingContext& context,
                                           UserId u) {
  const std::vector<ItemId> positives = context.Positives(u);
  if (positives.empty()) return std::nullopt;
  return RankUser(ScoreAll(theta, u), positives, context.Excluded(u));
}

}  // namespace

std::optional<double> UserAuc(const EmbeddingPair& theta,
                              const RankingContext& context, UserId u) {
  auto ranking = RankWithContext(theta, context, u);
  if (!ranking) return std::nullopt;
  return ranking->auc;
}

std::optional<TopK> UserTopK(const EmbeddingPair& theta,
                             const RankingContext& context, UserId u,
                             std::size_t k) {
  auto ranking = RankWithContext(theta, context, u);
  if (!ranking) return std::nullopt;
  return TopKFromRanks(ranking->ranks, k);
}

double MetricReport::Hr(std::size_t k) const {
  for (std::size_t n = 0; n < ks.size(); ++n) {
    if (ks[n] == k) return hr[n];
  }
  throw ConfigError("HR@" + std::to_string(k) + " was not evaluated");
}

double MetricReport::Ndcg(std::size_t k) const {
  for (std::size_t n = 0; n < ks.size(); ++n) {
    if (ks[n] == k) return ndcg[n];
  }
  throw ConfigError("NDCG@" + std::to_string(k) + " was not evaluated");
}

MetricReport CorpusMetrics(const EmbeddingPair& theta,
                           const SplitDataset& split,
                           const EvalOptions& options) {
  if (options.ks.empty()) throw ConfigError("no cutoffs given");
  const RankingContext context(split, options.target);
  const std::size_t nk = options.ks.size();
  std::vector<std::optional<UserRanking>> rankings(split.num_users);

  const std::size_t threads =
      std::max<std::size_t>(1, std::min(options.threads, split.num_users));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t u = begin; u < end; ++u) {
      rankings[u] = RankWithContext(theta, context, static_cast<UserId>(u));
    }
  };
  if (threads == 1) {
    work(0, split.num_users);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (split.num_users + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(split.num_users, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  MetricReport report;
  report.ks = options.ks;
  report.hr.assign(nk, 0.0);
  report.ndcg.assign(nk, 0.0);
  report.users.resize(split.num_users);
  report.items.resize(split.num_items);
  for (ItemMetrics& im : report.items) {
    im.hr.assign(nk, 0.0);
    im.ndcg.assign(nk, 0.0);
  }

  for (std::size_t u = 0; u < split.num_users; ++u) {
    UserMetrics& um = report.users[u];
    um.hr.assign(nk, 0.0);
    um.ndcg.assign(nk, 0.0);
    if (!rankings[u]) {
      ++report.users_skipped;
      continue;
    }
    const UserRanking& r = *rankings[u];
    um.evaluated = true;
    um.auc = r.auc;
    report.auc += r.auc;
    for (std::size_t n = 0; n < nk; ++n) {
      const TopK top = TopKFromRanks(r.ranks, options.ks[n]);
      um.hr[n] = top.hr;
      um.ndcg[n] = top.ndcg;
      report.hr[n] += top.hr;
      report.ndcg[n] += top.ndcg;
    }
    ++report.users_evaluated;

    for (std::size_t p = 0; p < r.positives.size(); ++p) {
      ItemMetrics& im = report.items[r.positives[p]];
      ++im.users;
      for (std::size_t n = 0; n < nk; ++n) {
        if (options.item_mode == ItemMetricMode::kUserAverage) {
          im.hr[n] += um.hr[n];
          im.ndcg[n] += um.ndcg[n];
        } else {
          const std::size_t single[] = {r.ranks[p]};
          const TopK top = TopKFromRanks(single, options.ks[n]);
          im.hr[n] += top.hr;
          im.ndcg[n] += top.ndcg;
        }
      }
    }
  }

  if (report.users_evaluated > 0) {
    const double denom = static_cast<double>(report.users_evaluated);
    report.auc /= denom;
    for (std::size_t n = 0; n < nk; ++n) {
      report.hr[n] /= denom;
      report.ndcg[n] /= denom;
    }
  }
  for (ItemMetrics& im : report.items) {
    if (im.users == 0) continue;
    for (std::size_t n = 0; n < nk; ++n) {
      im.hr[n] /= static_cast<double>(im.users);
      im.ndcg[n] /= static_cast<double>(im.users);
    }
  }
  return report;
}

std::vector<ItemMetrics> ItemMetricsAt(const EmbeddingPair& theta,
                                       const SplitDataset& split,
                                       std::size_t k, ItemMetricMode mode) {
  EvalOptions options;
  options.ks = {k};
  options.item_mode = mode;
  return CorpusMetrics(theta, split, options).items;
}

GroupReport GroupImprovementReport(const MetricReport& a,
                                   const MetricReport& b,
                                   const GroupLabels& groups) {
  if (a.users.size() != b.users.size() || a.items.size() != b.items.size() ||
      a.ks != b.ks) {
    throw IncompatibleError(
        "metric reports cover different entities or cutoffs");
  }
  if (groups.users.size() != a.users.size() ||
      groups.items.size() != a.items.size()) {
    throw IncompatibleError("group labels do not match the metric reports");
  }
  GroupReport out;
  struct Metric {
    std::string name;
    std::function<double(std::size_t)> a;
    std::function<double(std::size_t)> b;
  };

  auto run = [&](const std::string& kind, std::size_t count,
                 const std::vector<int>& labels, int num_groups,
                 auto&& present, const std::vector<Metric>& metrics) {
    std::vector<std::vector<std::size_t>> members(num_groups);
    for (std::size_t e = 0; e < count; ++e) {
      if (present(e)) members[labels[e]].push_back(e);
    }
    for (int g = 0; g < num_groups; ++g) {
      if (members[g].empty()) {
        out.notes.push_back(kind + " group " + std::to_string(g) +
                            " has no members; omitted");
        continue;
      }
      for (const Metric& m : metrics) {
        double sa = 0.0;
        double sb = 0.0;
        for (std::size_t e : members[g]) {
          sa += m.a(e);
          sb += m.b(e);
        }
        GroupDelta row;
        row.entity_kind = kind;
        row.metric = m.name;
        row.group = g;
        row.members = members[g].size();
        row.mean_a = sa / static_cast<double>(row.members);
        row.mean_b = sb / static_cast<double>(row.members);
        row.relative_delta = row.mean_a != 0.0
                                 ? (row.mean_b - row.mean_a) / row.mean_a
                                 : std::numeric_limits<double>::quiet_NaN();
        out.rows.push_back(row);
      }
    }
  };

  std::vector<Metric> user_metrics;
  user_metrics.push_back({"auc", [&](std::size_t u) { return a.users[u].auc; },
                          [&](std::size_t u) { return b.users[u].auc; }});
  std::vector<Metric> item_metrics;
  for (std::size_t n = 0; n < a.ks.size(); ++n) {
    const std::string k = std::to_string(a.ks[n]);
    user_metrics.push_back({"hr@" + k,
                            [&, n](std::size_t u) { return a.users[u].hr[n]; },
                            [&, n](std::size_t u) { return b.users[u].hr[n]; }});
    user_metrics.push_back(
        {"ndcg@" + k, [&, n](std::size_t u) { return a.users[u].ndcg[n]; },
         [&, n](std::size_t u) { return b.users[u].ndcg[n]; }});
    item_metrics.push_back({"hr@" + k,
                            [&, n](std::size_t i) { return a.items[i].hr[n]; },
                            [&, n](std::size_t i) { return b.items[i].hr[n]; }});
    item_metrics.push_back(
        {"ndcg@" + k, [&, n](std::size_t i) { return a.items[i].ndcg[n]; },
         [&, n](std::size_t i) { return b.items[i].ndcg[n]; }});
  }

  run("user", a.users.size(), groups.users, groups.num_user_groups,
      [&](std::size_t u) { return a.users[u].evaluated && b.users[u].evaluated; },
      user_metrics);
  run("item", a.items.size(), groups.items, groups.num_item_groups,
      [&](std::size_t i) { return a.items[i].users > 0 && b.items[i].users > 0; },
      item_metrics);
  return out;
}

void WriteReportSummary(std::ostream& out, const MetricReport& report) {
  out << "users_evaluated=" << report.users_evaluated << '\n';
  out << "users_skipped=" << report.users_skipped << '\n';
  out << "auc=" << FormatDouble(report.auc) << '\n';
  for (std::size_t n = 0; n < report.ks.size(); ++n) {
    out << "hr@" << report.ks[n] << '=' << FormatDouble(report.hr[n]) << '\n';
  }
  for (std::size_t n = 0; n < report.ks.size(); ++n) {
    out << "ndcg@" << report.ks[n] << '=' << FormatDouble(report.ndcg[n])
        << '\n';
  }
}

void SaveReport(const std::filesystem::path& dir, const MetricReport& report) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.txt");
    if (!out) throw IoError("cannot write " + (dir / "report.txt").string());
    WriteReportSummary(out, report);
  }
  {
    std::ofstream out(dir / "users.csv");
    if (!out) throw IoError("cannot write " + (dir / "users.csv").string());
    out << "user,evaluated,auc";
    for (std::size_t k : report.ks) out << ",hr@" << k;
    for (std::size_t k : report.ks) out << ",ndcg@" << k;
    out << '\n';
    for (std::size_t u = 0; u < report.users.size(); ++u) {
      const UserMetrics& m = report.users[u];
      out << u << ',' << (m.evaluated ? 1 : 0) << ',' << FormatDouble(m.auc);
      for (double v : m.hr) out << ',' << FormatDouble(v);
      for (double v : m.ndcg) out << ',' << FormatDouble(v);
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "items.csv");
    if (!out) throw IoError("cannot write " + (dir / "items.csv").string());
    out << "item,test_users";
    for (std::size_t k : report.ks) out << ",hr@" << k;
    for (std::size_t k : report.ks) out << ",ndcg@" << k;
    out << '\n';
    for (std::size_t i = 0; i < report.items.size(); ++i) {
      const ItemMetrics& m = report.items[i];
      out << i << ',' << m.users;
      for (double v : m.hr) out << ',' << FormatDouble(v);
      for (double v : m.ndcg) out << ',' << FormatDouble(v);
      out << '\n';
    }
  }
}

namespace {

std::vector<std::vector<std::string>> ReadRows(
    const std::filesystem::path& path, std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  DelimitedReader reader(in, ',');
  if (!reader.Next(header)) throw ParseError("missing header in " + path.string(), 1);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> fields;
  while (reader.Next(fields)) {
    if (fields.size() != header.size()) {
      throw ParseError("column count mismatch in " + path.string(),
                       reader.line());
    }
    rows.push_back(fields);
  }
  return rows;
}

double ToDouble(const std::string& s, const std::filesystem::path& path) {
  double v = 0.0;
  if (!ParseDouble(s, v)) throw ParseError("bad number in " + path.string(), 0);
  return v;
}

}  // namespace

MetricReport LoadReport(const std::filesystem::path& dir) {
  MetricReport report;
  std::vector<std::string> header;
  const auto users_path = dir / "users.csv";
  const auto user_rows = ReadRows(users_path, header);
  if (header.size() < 3 || (header.size() - 3) % 2 != 0) {
    throw ParseError("unexpected header in " + users_path.string(), 1);
  }
  const std::size_t nk = (header.size() - 3) / 2;
  for (std::size_t n = 0; n < nk; ++n) {
    std::int64_t k = 0;
    const std::string& name = header[3 + n];
    if (name.rfind("hr@", 0) != 0 || !ParseInt64(name.substr(3), k)) {
      throw ParseError("unexpected column " + name, 1);
    }
    report.ks.push_back(static_cast<std::size_t>(k));
  }
  report.hr.assign(nk, 0.0);
  report.ndcg.assign(nk, 0.0);
  for (const auto& row : user_rows) {
    UserMetrics m;
    m.evaluated = row[1] == "1";
    m.auc = ToDouble(row[2], users_path);
    for (std::size_t n = 0; n < nk; ++n) {
      m.hr.push_back(ToDouble(row[3 + n], users_path));
      m.ndcg.push_back(ToDouble(row[3 + nk + n], users_path));
    }
    if (m.evaluated) {
      ++report.users_evaluated;
      report.auc += m.auc;
      for (std::size_t n = 0; n < nk; ++n) {
        report.hr[n] += m.hr[n];
        report.ndcg[n] += m.ndcg[n];
      }
    } else {
      ++report.users_skipped;
    }
    report.users.push_back(std::move(m));
  }
  if (report.users_evaluated > 0) {
    const double denom = static_cast<double>(report.users_evaluated);
    report.auc /= denom;
    for (std::size_t n = 0; n < nk; ++n) {
      report.hr[n] /= denom;
      report.ndcg[n] /= denom;
    }
  }

  const auto items_path = dir / "items.csv";
  const auto item_rows = ReadRows(items_path, header);
  if (header.size() != 2 + 2 * nk) {
    throw ParseError("unexpected header in " + items_path.string(), 1);
  }
  for (const auto& row : item_rows) {
    ItemMetrics m;
    std::int64_t users = 0;
    if (!ParseInt64(row[1], users)) {
      throw ParseError("bad count in " + items_path.string(), 0);
    }
    m.users = static_cast<std::size_t>(users);
    for (std::size_t n = 0; n < nk; ++n) {
      m.hr.push_back(ToDouble(row[2 + n], items_path));
      m.ndcg.push_back(ToDouble(row[2 + nk + n], items_path));
    }
    report.items.push_back(std::move(m));
  }
  return report;
}

void WriteGroupReport(std::ostream& out, const GroupReport& report) {
  out << "entity_kind,group,members,metric,mean_a,mean_b,relative_delta\n";
  for (const GroupDelta& row : report.rows) {
    out << row.entity_kind << ',' << row.group << ',' << row.members << ','
        << row.metric << ',' << FormatDouble(row.mean_a) << ','
        << FormatDouble(row.mean_b) << ',' << FormatDouble(row.relative_delta)
        << '\n';
  }
  for (const std::string& note : report.notes) out << "# " << note << '\n';
}

}  // namespace lambdaopt
