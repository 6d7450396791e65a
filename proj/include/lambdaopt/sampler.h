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

#ifndef LAMBDAOPT_SAMPLER_H_
#define LAMBDAOPT_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "lambdaopt/data.h"
#include "lambdaopt/types.h"

namespace lambdaopt {

enum class Partition { kTrain, kValidation };

// Draws BPR triplets from one partition of a split.
//
// (u, i) is uniform over the partition's events. The negative is uniform over
// items outside the user's exclusion set: train items for the train
// partition, train and validation items for the validation partition.
// Rejection sampling is tried kMaxRejections times before falling back to
// enumerating the eligible items. Users whose exclusion set covers the whole
// catalog never get drawn.
class TripletSampler {
 public:
  static constexpr int kMaxRejections = 100;

  TripletSampler(const SplitDataset& split, Partition partition,
                 std::uint64_t seed);

  Triplet Sample();
  void SampleBatch(std::size_t size, std::vector<Triplet>& out);

  // Number of (user, item) events the sampler draws from.
  std::size_t num_events() const { return events_.size(); }

 private:
  const std::vector<ItemId>& Excluded(UserId u) const;

  const SplitDataset& split_;
  Partition partition_;
  std::mt19937_64 rng_;
  std::vector<std::pair<UserId, ItemId>> events_;
};

// Independent, reproducible stream seeds derived from one run seed.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace lambdaopt

#endif  // LAMBDAOPT_SAMPLER_H_
