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

#include "lambdaopt/sampler.h"

#include <algorithm>

#include "lambdaopt/error.h"

namespace lambdaopt {

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over (seed, stream).
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TripletSampler::TripletSampler(const SplitDataset& split, Partition partition,
                               std::uint64_t seed)
    : split_(split), partition_(partition), rng_(seed) {
  const auto& parts =
      partition == Partition::kTrain ? split.train : split.validation;
  std::size_t total = 0;
  for (std::size_t u = 0; u < split.num_users; ++u) {
    total += parts[u].size();
    if (Excluded(static_cast<UserId>(u)).size() >= split.num_items) continue;
    for (const TimedItem& t : parts[u]) {
      events_.emplace_back(static_cast<UserId>(u), t.item);
    }
  }
  if (total == 0) {
    throw SamplingError(partition == Partition::kTrain
                            ? "train partition is empty"
                            : "validation partition is empty");
  }
  if (events_.empty()) {
    throw SamplingError("every user has interacted with the whole catalog");
  }
}

const std::vector<ItemId>& TripletSampler::Excluded(UserId u) const {
  return partition_ == Partition::kTrain ? split_.user_pos_train[u]
                                         : split_.user_pos_train_val[u];
}

Triplet TripletSampler::Sample() {
  std::uniform_int_distribution<std::size_t> pick_event(0, events_.size() - 1);
  const auto [user, pos] = events_[pick_event(rng_)];
  const auto& excluded = Excluded(user);

  std::uniform_int_distribution<ItemId> pick_item(
      0, static_cast<ItemId>(split_.num_items - 1));
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const ItemId j = pick_item(rng_);
    if (!std::binary_search(excluded.begin(), excluded.end(), j)) {
      return {user, pos, j};
    }
  }
  // Near-saturated user: draw the rank of the negative among eligible items.
  const std::size_t eligible = split_.num_items - excluded.size();
  std::uniform_int_distribution<std::size_t> pick_rank(0, eligible - 1);
  std::size_t rank = pick_rank(rng_);
  ItemId j = 0;
  for (ItemId x : excluded) {
    if (x < j) continue;
    if (x - j > rank) break;
    rank -= x - j;
    j = x + 1;
  }
  return {user, pos, static_cast<ItemId>(j + rank)};
}

void TripletSampler::SampleBatch(std::size_t size, std::vector<Triplet>& out) {
  out.clear();
  out.reserve(size);
  for (std::size_t n = 0; n < size; ++n) out.push_back(Sample());
}

}  // namespace lambdaopt
