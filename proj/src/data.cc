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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string_view>
#include <unordered_map>

#include "lambdaopt/csv.h"
#include "lambdaopt/error.h"

namespace lambdaopt {
namespace {

// Keeps, for each (user, item) pair, the occurrence with the smallest
// timestamp; survivors stay in input order.
std::vector<Event> Deduplicate(const std::vector<Event>& events,
                               std::size_t num_items) {
  std::unordered_map<std::uint64_t, std::size_t> best;
  best.reserve(events.size());
  for (std::size_t idx = 0; idx < events.size(); ++idx) {
    const Event& e = events[idx];
    const std::uint64_t key =
        static_cast<std::uint64_t>(e.user) * num_items + e.item;
    auto [it, inserted] = best.try_emplace(key, idx);
    if (!inserted && e.timestamp < events[it->second].timestamp) {
      it->second = idx;
    }
  }
  std::vector<std::size_t> keep;
  keep.reserve(best.size());
  for (const auto& [key, idx] : best) keep.push_back(idx);
  std::sort(keep.begin(), keep.end());
  std::vector<Event> out;
  out.reserve(keep.size());
  for (std::size_t idx : keep) out.push_back(events[idx]);
  return out;
}

void WriteIdMap(const std::filesystem::path& path,
                const std::vector<std::string>& tokens) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "token,id\n";
  for (std::size_t id = 0; id < tokens.size(); ++id) {
    out << QuoteField(tokens[id]) << ',' << id << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::string> ReadIdMap(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  DelimitedReader reader(in, ',');
  std::vector<std::string> fields;
  std::vector<std::string> tokens;
  bool first = true;
  while (reader.Next(fields)) {
    if (first) {
      first = false;
      continue;
    }
    std::int64_t id = 0;
    if (fields.size() != 2 || !ParseInt64(fields[1], id) ||
        id != static_cast<std::int64_t>(tokens.size())) {
      throw ParseError("bad id-map row in " + path.string(), reader.line());
    }
    tokens.push_back(std::move(fields[0]));
  }
  return tokens;
}

}  // namespace

InteractionLog ReadInteractions(std::istream& in, const LogFormat& format) {
  DelimitedReader reader(in, format.delimiter);
  std::vector<std::string> fields;
  std::unordered_map<std::string, UserId> user_ids;
  std::unordered_map<std::string, ItemId> item_ids;
  InteractionLog log;
  std::vector<Event> raw;
  const std::size_t needed =
      std::max({format.user_column, format.item_column,
                format.timestamp_column}) + 1;

  bool skip_header = format.header;
  while (reader.Next(fields)) {
    if (skip_header) {
      skip_header = false;
      continue;
    }
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() < needed) {
      throw ParseError("expected at least " + std::to_string(needed) +
                           " columns, got " + std::to_string(fields.size()),
                       reader.line());
    }
    const std::string& user = fields[format.user_column];
    const std::string& item = fields[format.item_column];
    std::int64_t timestamp = 0;
    if (user.empty() || item.empty()) {
      throw ParseError("empty user or item token", reader.line());
    }
    if (!ParseInt64(fields[format.timestamp_column], timestamp)) {
      throw ParseError("bad timestamp '" + fields[format.timestamp_column] +
                           "'",
                       reader.line());
    }
    auto [uit, unew] =
        user_ids.try_emplace(user, static_cast<UserId>(user_ids.size()));
    if (unew) log.user_tokens.push_back(user);
    auto [iit, inew] =
        item_ids.try_emplace(item, static_cast<ItemId>(item_ids.size()));
    if (inew) log.item_tokens.push_back(item);
    raw.push_back({uit->second, iit->second, timestamp});
  }
  if (raw.empty()) throw EmptyCorpusError("no interactions in input");
  log.num_users = log.user_tokens.size();
  log.num_items = log.item_tokens.size();
  log.events = Deduplicate(raw, log.num_items);
  return log;
}

InteractionLog LoadInteractions(const std::filesystem::path& path,
                                const LogFormat& format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return ReadInteractions(in, format);
}

InteractionLog FilterMinCount(const InteractionLog& log, std::size_t min_user,
                              std::size_t min_item) {
  std::vector<bool> user_alive(log.num_users, true);
  std::vector<bool> item_alive(log.num_items, true);
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::size_t> user_count(log.num_users, 0);
    std::vector<std::size_t> item_count(log.num_items, 0);
    for (const Event& e : log.events) {
      if (user_alive[e.user] && item_alive[e.item]) {
        ++user_count[e.user];
        ++item_count[e.item];
      }
    }
    for (std::size_t u = 0; u < log.num_users; ++u) {
      if (user_alive[u] && user_count[u] < std::max<std::size_t>(min_user, 1)) {
        user_alive[u] = false;
        changed = true;
      }
    }
    for (std::size_t i = 0; i < log.num_items; ++i) {
      if (item_alive[i] && item_count[i] < std::max<std::size_t>(min_item, 1)) {
        item_alive[i] = false;
        changed = true;
      }
    }
  }

  constexpr std::uint32_t kDropped = ~std::uint32_t{0};
  InteractionLog out;
  std::vector<std::uint32_t> user_map(log.num_users, kDropped);
  std::vector<std::uint32_t> item_map(log.num_items, kDropped);
  for (std::size_t u = 0; u < log.num_users; ++u) {
    if (!user_alive[u]) continue;
    user_map[u] = static_cast<std::uint32_t>(out.user_tokens.size());
    out.user_tokens.push_back(u < log.user_tokens.size() ? log.user_tokens[u]
                                                         : std::to_string(u));
  }
  for (std::size_t i = 0; i < log.num_items; ++i) {
    if (!item_alive[i]) continue;
    item_map[i] = static_cast<std::uint32_t>(out.item_tokens.size());
    out.item_tokens.push_back(i < log.item_tokens.size() ? log.item_tokens[i]
                                                         : std::to_string(i));
  }
  for (const Event& e : log.events) {
    if (user_alive[e.user] && item_alive[e.item]) {
      out.events.push_back({user_map[e.user], item_map[e.item], e.timestamp});
    }
  }
  if (out.events.empty()) {
    throw EmptyCorpusError("filtering removed every interaction");
  }
  out.num_users = out.user_tokens.size();
  out.num_items = out.item_tokens.size();
  return out;
}

bool SplitDataset::InTrain(UserId u, ItemId i) const {
  const auto& items = user_pos_train[u];
  return std::binary_search(items.begin(), items.end(), i);
}

bool SplitDataset::InTrainOrValidation(UserId u, ItemId i) const {
  const auto& items = user_pos_train_val[u];
  return std::binary_search(items.begin(), items.end(), i);
}

namespace {
std::size_t CountAll(const std::vector<std::vector<TimedItem>>& parts) {
  std::size_t n = 0;
  for (const auto& p : parts) n += p.size();
  return n;
}
}  // namespace

std::size_t SplitDataset::NumTrain() const { return CountAll(train); }
std::size_t SplitDataset::NumValidation() const { return CountAll(validation); }
std::size_t SplitDataset::NumTest() const { return CountAll(test); }

SplitDataset MakeSplitDataset(std::size_t num_users, std::size_t num_items,
                              std::vector<std::vector<TimedItem>> train,
                              std::vector<std::vector<TimedItem>> validation,
                              std::vector<std::vector<TimedItem>> test) {
  train.resize(num_users);
  validation.resize(num_users);
  test.resize(num_users);

  SplitDataset split;
  split.num_users = num_users;
  split.num_items = num_items;
  split.user_pos_train.resize(num_users);
  split.user_pos_train_val.resize(num_users);
  split.user_frequency.assign(num_users, 0);
  split.item_frequency.assign(num_items, 0);

  for (std::size_t u = 0; u < num_users; ++u) {
    auto& pos_train = split.user_pos_train[u];
    for (const TimedItem& t : train[u]) {
      pos_train.push_back(t.item);
      ++split.item_frequency[t.item];
    }
    std::sort(pos_train.begin(), pos_train.end());
    split.user_frequency[u] = train[u].size();

    auto& pos_tv = split.user_pos_train_val[u];
    pos_tv = pos_train;
    for (const TimedItem& t : validation[u]) pos_tv.push_back(t.item);
    std::sort(pos_tv.begin(), pos_tv.end());

    if (validation[u].empty() || test[u].empty()) {
      split.users_without_holdout.push_back(static_cast<UserId>(u));
    }
  }
  split.train = std::move(train);
  split.validation = std::move(validation);
  split.test = std::move(test);
  return split;
}

std::array<std::size_t, 3> PartitionSizes(std::size_t n,
                                          const SplitRatios& ratios) {
  // The epsilon keeps products such as 0.6 * 15 from rounding past the
  // integer they represent.
  constexpr double kSlack = 1e-9;
  auto ceil_share = [&](double r) {
    return static_cast<std::size_t>(
        std::ceil(r * static_cast<double>(n) - kSlack));
  };
  const std::size_t train = std::min(n, std::max<std::size_t>(
                                            ceil_share(ratios.train), 1));
  const std::size_t validation =
      std::min(ceil_share(ratios.validation), n - train);
  return {train, validation, n - train - validation};
}

SplitDataset ChronologicalSplit(const InteractionLog& log,
                                const SplitRatios& ratios) {
  if (!(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0) ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be positive and sum to 1");
  }
  std::vector<std::vector<TimedItem>> per_user(log.num_users);
  for (const Event& e : log.events) {
    per_user[e.user].push_back({e.item, e.timestamp});
  }
  std::vector<std::vector<TimedItem>> train(log.num_users);
  std::vector<std::vector<TimedItem>> validation(log.num_users);
  std::vector<std::vector<TimedItem>> test(log.num_users);
  for (std::size_t u = 0; u < log.num_users; ++u) {
    auto& events = per_user[u];
    std::stable_sort(events.begin(), events.end(),
                     [](const TimedItem& a, const TimedItem& b) {
                       return a.timestamp < b.timestamp;
                     });
    const auto [n_train, n_val, n_test] = PartitionSizes(events.size(), ratios);
    auto first = events.begin();
    train[u].assign(first, first + n_train);
    validation[u].assign(first + n_train, first + n_train + n_val);
    test[u].assign(first + n_train + n_val, events.end());
  }
  return MakeSplitDataset(log.num_users, log.num_items, std::move(train),
                          std::move(validation), std::move(test));
}

std::vector<int> FrequencyGroups(std::span<const std::size_t> frequencies,
                                 std::span<const std::size_t> boundaries) {
  for (std::size_t b = 1; b < boundaries.size(); ++b) {
    if (boundaries[b] <= boundaries[b - 1]) {
      throw ConfigError("frequency-group boundaries must be strictly ascending");
    }
  }
  std::vector<int> groups;
  groups.reserve(frequencies.size());
  for (std::size_t f : frequencies) {
    groups.push_back(static_cast<int>(
        std::upper_bound(boundaries.begin(), boundaries.end(), f) -
        boundaries.begin()));
  }
  return groups;
}

GroupLabels MakeGroupLabels(const SplitDataset& split,
                            std::span<const std::size_t> user_boundaries,
                            std::span<const std::size_t> item_boundaries) {
  GroupLabels labels;
  labels.users = FrequencyGroups(split.user_frequency, user_boundaries);
  labels.items = FrequencyGroups(split.item_frequency, item_boundaries);
  labels.num_user_groups = static_cast<int>(user_boundaries.size()) + 1;
  labels.num_item_groups = static_cast<int>(item_boundaries.size()) + 1;
  return labels;
}

void SaveManifest(const std::filesystem::path& dir, const InteractionLog& log,
                  const SplitDataset& split) {
  std::filesystem::create_directories(dir);
  WriteIdMap(dir / "users.csv", log.user_tokens);
  WriteIdMap(dir / "items.csv", log.item_tokens);

  std::ofstream out(dir / "split.csv");
  if (!out) throw IoError("cannot write " + (dir / "split.csv").string());
  out << "user,partition,item,timestamp\n";
  auto write_part = [&](std::size_t u, std::string_view name,
                        const std::vector<TimedItem>& items) {
    for (const TimedItem& t : items) {
      out << u << ',' << name << ',' << t.item << ',' << t.timestamp << '\n';
    }
  };
  for (std::size_t u = 0; u < split.num_users; ++u) {
    write_part(u, "train", split.train[u]);
    write_part(u, "validation", split.validation[u]);
    write_part(u, "test", split.test[u]);
  }
  if (!out) throw IoError("failed writing split manifest");
}

Manifest LoadManifest(const std::filesystem::path& dir) {
  Manifest manifest;
  manifest.user_tokens = ReadIdMap(dir / "users.csv");
  manifest.item_tokens = ReadIdMap(dir / "items.csv");
  const std::size_t num_users = manifest.user_tokens.size();
  const std::size_t num_items = manifest.item_tokens.size();

  const auto path = dir / "split.csv";
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  DelimitedReader reader(in, ',');
  std::vector<std::string> fields;
  std::vector<std::vector<TimedItem>> train(num_users);
  std::vector<std::vector<TimedItem>> validation(num_users);
  std::vector<std::vector<TimedItem>> test(num_users);
  bool first = true;
  while (reader.Next(fields)) {
    if (first) {
      first = false;
      continue;
    }
    std::int64_t user = 0;
    std::int64_t item = 0;
    std::int64_t timestamp = 0;
    if (fields.size() != 4 || !ParseInt64(fields[0], user) ||
        !ParseInt64(fields[2], item) || !ParseInt64(fields[3], timestamp) ||
        user < 0 || static_cast<std::size_t>(user) >= num_users || item < 0 ||
        static_cast<std::size_t>(item) >= num_items) {
      throw ParseError("bad split-manifest row", reader.line());
    }
    const TimedItem entry{static_cast<ItemId>(item), timestamp};
    if (fields[1] == "train") {
      train[user].push_back(entry);
    } else if (fields[1] == "validation") {
      validation[user].push_back(entry);
    } else if (fields[1] == "test") {
      test[user].push_back(entry);
    } else {
      throw ParseError("unknown partition '" + fields[1] + "'", reader.line());
    }
  }
  manifest.split = MakeSplitDataset(num_users, num_items, std::move(train),
                                    std::move(validation), std::move(test));
  return manifest;
}

}  // namespace lambdaopt
