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

#ifndef LAMBDAOPT_MF_H_
#define LAMBDAOPT_MF_H_

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lambdaopt/lambda_tensor.h"
#include "lambdaopt/matrix.h"
#include "lambdaopt/types.h"

namespace lambdaopt {

// Model parameters: a |U| x K user table and a |I| x K item table.
struct EmbeddingPair {
  Matrix users;
  Matrix items;

  EmbeddingPair() = default;
  EmbeddingPair(std::size_t num_users, std::size_t num_items, std::size_t dim)
      : users(num_users, dim), items(num_items, dim) {}

  // Zero-mean Gaussian entries with the given standard deviation.
  static EmbeddingPair Gaussian(std::size_t num_users, std::size_t num_items,
                                std::size_t dim, double stddev,
                                std::uint64_t seed);

  std::size_t dim() const { return users.cols(); }
  std::size_t num_users() const { return users.rows(); }
  std::size_t num_items() const { return items.rows(); }

  std::span<const double> user_row(UserId u) const { return users.row(u); }
  std::span<const double> item_row(ItemId i) const { return items.row(i); }

  bool operator==(const EmbeddingPair&) const = default;
};

// Rows keyed by id, sorted ascending; rows that are absent are zero (for a
// gradient) or unchanged (for a parameter patch).
class SparseRows {
 public:
  explicit SparseRows(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  std::span<const std::uint32_t> ids() const { return ids_; }
  std::uint32_t id_at(std::size_t slot) const { return ids_[slot]; }
  std::span<const double> row_at(std::size_t slot) const {
    return {values_.data() + slot * dim_, dim_};
  }
  std::span<double> row_at(std::size_t slot) {
    return {values_.data() + slot * dim_, dim_};
  }

  // Slot of `id`, if present.
  std::optional<std::size_t> Find(std::uint32_t id) const;

  // Appends a row; ids must arrive in ascending order.
  std::span<double> Append(std::uint32_t id);
  void Reserve(std::size_t rows);

  bool operator==(const SparseRows&) const = default;

 private:
  std::size_t dim_;
  std::vector<std::uint32_t> ids_;
  std::vector<double> values_;
};

// Sparse counterpart of EmbeddingPair: touched user rows and touched item
// rows. Used for gradients and for the rows of an assumed parameter update.
struct SparseEmbedding {
  SparseRows users;
  SparseRows items;

  SparseEmbedding() = default;
  explicit SparseEmbedding(std::size_t dim) : users(dim), items(dim) {}
  SparseEmbedding(SparseRows u, SparseRows i)
      : users(std::move(u)), items(std::move(i)) {}

  bool operator==(const SparseEmbedding&) const = default;
};

using SparseGradient = SparseEmbedding;

// Sums scaled K-vectors per row id with Neumaier-compensated addition, so the
// result does not depend on the order rows were added in beyond the last ulp.
class RowAccumulator {
 public:
  // Row ids must be below `num_rows`; `expected_rows` only sizes the
  // initial allocation.
  RowAccumulator(std::size_t dim, std::size_t num_rows,
                 std::size_t expected_rows = 0);

  void Add(std::uint32_t id, std::span<const double> v, double scale);
  // Makes sure `id` is present even if nothing is added to it.
  void Touch(std::uint32_t id);

  SparseRows Finish() const;

 private:
  std::size_t SlotFor(std::uint32_t id);

  static constexpr std::uint32_t kNoSlot = 0xffffffffu;

  std::size_t dim_;
  std::vector<std::uint32_t> slot_;  // per row id, kNoSlot if absent
  std::vector<std::uint32_t> ids_;
  std::vector<double> sum_;
  std::vector<double> comp_;
};

// Parameters with some rows replaced; reads fall through to `base`.
class PatchedEmbedding {
 public:
  PatchedEmbedding(const EmbeddingPair& base, const SparseEmbedding& patch)
      : base_(base), patch_(patch) {}

  std::size_t dim() const { return base_.dim(); }
  std::size_t num_users() const { return base_.num_users(); }
  std::size_t num_items() const { return base_.num_items(); }
  std::span<const double> user_row(UserId u) const;
  std::span<const double> item_row(ItemId i) const;

 private:
  const EmbeddingPair& base_;
  const SparseEmbedding& patch_;
};

template <class P>
concept EmbeddingSource = requires(const P& p, UserId u, ItemId i) {
  { p.user_row(u) } -> std::convertible_to<std::span<const double>>;
  { p.item_row(i) } -> std::convertible_to<std::span<const double>>;
  { p.dim() } -> std::convertible_to<std::size_t>;
  { p.num_users() } -> std::convertible_to<std::size_t>;
  { p.num_items() } -> std::convertible_to<std::size_t>;
};

// -ln(sigmoid(x)) = ln(1 + e^-x), evaluated without overflow.
double NegLogSigmoid(double x);
double Sigmoid(double x);

double Dot(std::span<const double> a, std::span<const double> b);

double Score(const EmbeddingPair& theta, UserId u, ItemId i);

// Unregularized BPR loss: sum over the batch of -ln sigmoid(y_ui - y_uj).
template <EmbeddingSource P>
double BprLoss(const P& theta, std::span<const Triplet> batch);

// Closed-form gradient of BprLoss. If `loss` is given, it receives the loss
// of the same batch.
template <EmbeddingSource P>
SparseGradient BprGradient(const P& theta, std::span<const Triplet> batch,
                           double* loss = nullptr);

// sum over all coordinates of lambda * theta^2. Throws ConfigError when the
// tensor does not match the parameter shapes.
double Penalty(const EmbeddingPair& theta, const LambdaTensor& lambda);

// Elementwise 2 * lambda * theta for both tables.
EmbeddingPair PenaltyGradient(const EmbeddingPair& theta,
                              const LambdaTensor& lambda);

void CheckShapes(const EmbeddingPair& theta, const LambdaTensor& lambda);

// Dense copy of `base` with the rows of `patch` written over it.
EmbeddingPair Materialize(const EmbeddingPair& base,
                          const SparseEmbedding& patch);

}  // namespace lambdaopt

#endif  // LAMBDAOPT_MF_H_
