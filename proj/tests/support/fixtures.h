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

#ifndef LAMBDAOPT_TESTS_SUPPORT_FIXTURES_H_
#define LAMBDAOPT_TESTS_SUPPORT_FIXTURES_H_

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "lambdaopt/data.h"
#include "lambdaopt/types.h"

namespace lambdaopt::testing {

using ItemLists = std::vector<std::vector<ItemId>>;

inline std::vector<std::vector<TimedItem>> Timed(const ItemLists& lists,
                                                 std::int64_t base) {
  std::vector<std::vector<TimedItem>> out(lists.size());
  for (std::size_t u = 0; u < lists.size(); ++u) {
    std::int64_t t = base;
    for (ItemId i : lists[u]) out[u].push_back({i, t++});
  }
  return out;
}

// Split with the given per-user item lists; timestamps increase through
// train, then validation, then test.
inline SplitDataset MakeSplit(std::size_t num_items, const ItemLists& train,
                              const ItemLists& validation = {},
                              const ItemLists& test = {}) {
  const std::size_t nu = train.size();
  ItemLists val = validation, tst = test;
  val.resize(nu);
  tst.resize(nu);
  return MakeSplitDataset(nu, num_items, Timed(train, 0), Timed(val, 1000),
                          Timed(tst, 2000));
}

// Random split in which every user has `train_per_user` train items, one
// validation item and one test item, all distinct.
inline SplitDataset RandomSplit(std::size_t num_users, std::size_t num_items,
                                std::size_t train_per_user, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ItemLists train(num_users), val(num_users), test(num_users);
  std::vector<ItemId> items(num_items);
  for (std::size_t i = 0; i < num_items; ++i) items[i] = ItemId(i);
  for (std::size_t u = 0; u < num_users; ++u) {
    std::shuffle(items.begin(), items.end(), rng);
    train[u].assign(items.begin(), items.begin() + train_per_user);
    val[u] = {items[train_per_user]};
    test[u] = {items[train_per_user + 1]};
  }
  return MakeSplit(num_items, train, val, test);
}

}  // namespace lambdaopt::testing

#endif  // LAMBDAOPT_TESTS_SUPPORT_FIXTURES_H_
