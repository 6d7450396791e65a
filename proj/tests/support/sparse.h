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

#ifndef LAMBDAOPT_TESTS_SUPPORT_SPARSE_H_
#define LAMBDAOPT_TESTS_SUPPORT_SPARSE_H_

#include <random>
#include <vector>

#include "lambdaopt/mf.h"

namespace lambdaopt::testing {

// Sparse gradient with random entries on the given (ascending) rows.
inline SparseGradient RandomSparse(std::size_t dim,
                                   const std::vector<std::uint32_t>& users,
                                   const std::vector<std::uint32_t>& items,
                                   std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  SparseGradient g(dim);
  for (std::uint32_t u : users) {
    for (double& v : g.users.Append(u)) v = normal(rng);
  }
  for (std::uint32_t i : items) {
    for (double& v : g.items.Append(i)) v = normal(rng);
  }
  return g;
}

inline SparseGradient SingleUserRow(std::size_t dim, std::uint32_t u,
                                    std::vector<double> values) {
  SparseGradient g(dim);
  auto row = g.users.Append(u);
  for (std::size_t k = 0; k < dim; ++k) row[k] = values[k];
  return g;
}

}  // namespace lambdaopt::testing

#endif  // LAMBDAOPT_TESTS_SUPPORT_SPARSE_H_
