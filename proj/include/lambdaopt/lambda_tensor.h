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

#ifndef LAMBDAOPT_LAMBDA_TENSOR_H_
#define LAMBDAOPT_LAMBDA_TENSOR_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "lambdaopt/matrix.h"

namespace lambdaopt {

// Sharing pattern of the L2 coefficients.
//
//   kGlobal   one scalar for every coordinate of both tables
//   kDim      one coefficient per latent dimension, shared by both tables
//   kUser     one per user row; the item table gets a single scalar
//   kItem     one per item row; the user table gets a single scalar
//   kUserDim  one per (user, dim); the item table is dimension-wise
//   kItemDim  one per (item, dim); the user table is dimension-wise
//   kDui      one per (user, dim) and one per (item, dim)
enum class Granularity { kGlobal, kDim, kUser, kItem, kUserDim, kItemDim, kDui };

// Short names: "global", "D", "U", "I", "DU", "DI", "DUI".
std::string_view GranularityName(Granularity g);
Granularity ParseGranularity(std::string_view name);

// Addressing of one side (user or item table) into the flat coefficient
// vector of a LambdaTensor.
struct PartLayout {
  enum class Kind { kScalar, kPerDim, kPerRow, kPerRowDim };

  Kind kind = Kind::kScalar;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t dim = 0;

  std::size_t index(std::size_t row, std::size_t col) const {
    switch (kind) {
      case Kind::kScalar:
        return offset;
      case Kind::kPerDim:
        return offset + col;
      case Kind::kPerRow:
        return offset + row;
      case Kind::kPerRowDim:
        return offset + row * dim + col;
    }
    return offset;
  }

  std::size_t size() const;

  bool operator==(const PartLayout&) const = default;
};

// Nonnegative L2 coefficients at a chosen granularity. All free entries live
// in one flat vector; Global and Dim tensors share their entries between the
// user and item tables.
class LambdaTensor {
 public:
  LambdaTensor() = default;
  LambdaTensor(Granularity granularity, std::size_t num_users,
               std::size_t num_items, std::size_t dim, double init = 0.0);

  Granularity granularity() const { return granularity_; }
  std::size_t num_users() const { return num_users_; }
  std::size_t num_items() const { return num_items_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  const PartLayout& user_part() const { return user_; }
  const PartLayout& item_part() const { return item_; }

  std::size_t user_index(std::size_t u, std::size_t k) const {
    return user_.index(u, k);
  }
  std::size_t item_index(std::size_t i, std::size_t k) const {
    return item_.index(i, k);
  }
  double user_coef(std::size_t u, std::size_t k) const {
    return values_[user_.index(u, k)];
  }
  double item_coef(std::size_t i, std::size_t k) const {
    return values_[item_.index(i, k)];
  }

  bool operator==(const LambdaTensor&) const = default;

 private:
  Granularity granularity_ = Granularity::kGlobal;
  std::size_t num_users_ = 0;
  std::size_t num_items_ = 0;
  std::size_t dim_ = 0;
  PartLayout user_;
  PartLayout item_;
  std::vector<double> values_;
};

// Dense per-coordinate coefficients for both tables.
struct BroadcastLambda {
  Matrix users;
  Matrix items;
};

BroadcastLambda Broadcast(const LambdaTensor& lambda);

}  // namespace lambdaopt

#endif  // LAMBDAOPT_LAMBDA_TENSOR_H_
