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

#ifndef LAMBDAOPT_TYPES_H_
#define LAMBDAOPT_TYPES_H_

#include <cstdint>

namespace lambdaopt {

using UserId = std::uint32_t;
using ItemId = std::uint32_t;

// A BPR training example: `user` prefers `pos` over `neg`.
struct Triplet {
  UserId user = 0;
  ItemId pos = 0;
  ItemId neg = 0;

  bool operator==(const Triplet&) const = default;
};

}  // namespace lambdaopt

#endif  // LAMBDAOPT_TYPES_H_
