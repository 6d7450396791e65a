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

#include "lambdaopt/lambda_tensor.h"

#include <string>

#include "lambdaopt/error.h"

namespace lambdaopt {

std::string_view GranularityName(Granularity g) {
  switch (g) {
    case Granularity::kGlobal:
      return "global";
    case Granularity::kDim:
      return "D";
    case Granularity::kUser:
      return "U";
    case Granularity::kItem:
      return "I";
    case Granularity::kUserDim:
      return "DU";
    case Granularity::kItemDim:
      return "DI";
    case Granularity::kDui:
      return "DUI";
  }
  return "?";
}

Granularity ParseGranularity(std::string_view name) {
  for (Granularity g :
       {Granularity::kGlobal, Granularity::kDim, Granularity::kUser,
        Granularity::kItem, Granularity::kUserDim, Granularity::kItemDim,
        Granularity::kDui}) {
    if (name == GranularityName(g)) return g;
  }
  throw ConfigError("unknown granularity '" + std::string(name) +
                    "' (expected global, D, U, I, DU, DI or DUI)");
}

std::size_t PartLayout::size() const {
  switch (kind) {
    case Kind::kScalar:
      return 1;
    case Kind::kPerDim:
      return dim;
    case Kind::kPerRow:
      return rows;
    case Kind::kPerRowDim:
      return rows * dim;
  }
  return 0;
}

LambdaTensor::LambdaTensor(Granularity granularity, std::size_t num_users,
                           std::size_t num_items, std::size_t dim, double init)
    : granularity_(granularity),
      num_users_(num_users),
      num_items_(num_items),
      dim_(dim) {
  using Kind = PartLayout::Kind;
  auto part = [&](Kind kind, std::size_t offset, std::size_t rows) {
    return PartLayout{kind, offset, rows, dim};
  };
  std::size_t total = 0;
  switch (granularity) {
    case Granularity::kGlobal:
      user_ = part(Kind::kScalar, 0, num_users);
      item_ = part(Kind::kScalar, 0, num_items);
      total = 1;
      break;
    case Granularity::kDim:
      user_ = part(Kind::kPerDim, 0, num_users);
      item_ = part(Kind::kPerDim, 0, num_items);
      total = dim;
      break;
    case Granularity::kUser:
      user_ = part(Kind::kPerRow, 0, num_users);
      item_ = part(Kind::kScalar, num_users, num_items);
      total = num_users + 1;
      break;
    case Granularity::kItem:
      user_ = part(Kind::kScalar, 0, num_users);
      item_ = part(Kind::kPerRow, 1, num_items);
      total = 1 + num_items;
      break;
    case Granularity::kUserDim:
      user_ = part(Kind::kPerRowDim, 0, num_users);
      item_ = part(Kind::kPerDim, num_users * dim, num_items);
      total = num_users * dim + dim;
      break;
    case Granularity::kItemDim:
      user_ = part(Kind::kPerDim, 0, num_users);
      item_ = part(Kind::kPerRowDim, dim, num_items);
      total = dim + num_items * dim;
      break;
    case Granularity::kDui:
      user_ = part(Kind::kPerRowDim, 0, num_users);
      item_ = part(Kind::kPerRowDim, num_users * dim, num_items);
      total = (num_users + num_items) * dim;
      break;
  }
  values_.assign(total, init);
}

BroadcastLambda Broadcast(const LambdaTensor& lambda) {
  BroadcastLambda out{Matrix(lambda.num_users(), lambda.dim()),
                      Matrix(lambda.num_items(), lambda.dim())};
  for (std::size_t u = 0; u < lambda.num_users(); ++u) {
    for (std::size_t k = 0; k < lambda.dim(); ++k) {
      out.users(u, k) = lambda.user_coef(u, k);
    }
  }
  for (std::size_t i = 0; i < lambda.num_items(); ++i) {
    for (std::size_t k = 0; k < lambda.dim(); ++k) {
      out.items(i, k) = lambda.item_coef(i, k);
    }
  }
  return out;
}

}  // namespace lambdaopt
