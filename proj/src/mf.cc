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

#include "lambdaopt/mf.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "lambdaopt/error.h"

namespace lambdaopt {
namespace {

inline void NeumaierAdd(double& sum, double& comp, double x) {
  const double t = sum + x;
  if (std::abs(sum) >= std::abs(x)) {
    comp += (sum - t) + x;
  } else {
    comp += (x - t) + sum;
  }
  sum = t;
}

// Branch point for the asymptotic forms of the softplus.
constexpr double kSoftplusCutoff = 30.0;

}  // namespace

EmbeddingPair EmbeddingPair::Gaussian(std::size_t num_users,
                                      std::size_t num_items, std::size_t dim,
                                      double stddev, std::uint64_t seed) {
  EmbeddingPair theta(num_users, num_items, dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  for (double& v : theta.users.values()) v = normal(rng);
  for (double& v : theta.items.values()) v = normal(rng);
  return theta;
}

std::optional<std::size_t> SparseRows::Find(std::uint32_t id) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

std::span<double> SparseRows::Append(std::uint32_t id) {
  ids_.push_back(id);
  values_.resize(values_.size() + dim_, 0.0);
  return row_at(ids_.size() - 1);
}

void SparseRows::Reserve(std::size_t rows) {
  ids_.reserve(rows);
  values_.reserve(rows * dim_);
}

RowAccumulator::RowAccumulator(std::size_t dim, std::size_t num_rows,
                               std::size_t expected_rows)
    : dim_(dim), slot_(num_rows, kNoSlot) {
  ids_.reserve(expected_rows);
  sum_.reserve(expected_rows * dim);
  comp_.reserve(expected_rows * dim);
}

std::size_t RowAccumulator::SlotFor(std::uint32_t id) {
  std::uint32_t& slot = slot_.at(id);
  if (slot == kNoSlot) {
    slot = static_cast<std::uint32_t>(ids_.size());
    ids_.push_back(id);
    sum_.resize(sum_.size() + dim_, 0.0);
    comp_.resize(comp_.size() + dim_, 0.0);
  }
  return slot;
}

void RowAccumulator::Add(std::uint32_t id, std::span<const double> v,
                         double scale) {
  const std::size_t base = SlotFor(id) * dim_;
  for (std::size_t k = 0; k < dim_; ++k) {
    NeumaierAdd(sum_[base + k], comp_[base + k], scale * v[k]);
  }
}

void RowAccumulator::Touch(std::uint32_t id) { SlotFor(id); }

SparseRows RowAccumulator::Finish() const {
  std::vector<std::size_t> order(ids_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ids_[a] < ids_[b]; });
  SparseRows rows(dim_);
  rows.Reserve(ids_.size());
  for (std::size_t slot : order) {
    auto out = rows.Append(ids_[slot]);
    for (std::size_t k = 0; k < dim_; ++k) {
      out[k] = sum_[slot * dim_ + k] + comp_[slot * dim_ + k];
    }
  }
  return rows;
}

std::span<const double> PatchedEmbedding::user_row(UserId u) const {
  if (auto slot = patch_.users.Find(u)) return patch_.users.row_at(*slot);
  return base_.user_row(u);
}

std::span<const double> PatchedEmbedding::item_row(ItemId i) const {
  if (auto slot = patch_.items.Find(i)) return patch_.items.row_at(*slot);
  return base_.item_row(i);
}

double NegLogSigmoid(double x) {
  if (x > kSoftplusCutoff) return std::exp(-x);
  if (x < -kSoftplusCutoff) return -x + std::exp(x);
  return std::log1p(std::exp(-x));
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double Score(const EmbeddingPair& theta, UserId u, ItemId i) {
  return Dot(theta.user_row(u), theta.item_row(i));
}

template <EmbeddingSource P>
double BprLoss(const P& theta, std::span<const Triplet> batch) {
  double sum = 0.0;
  double comp = 0.0;
  for (const Triplet& t : batch) {
    const auto wu = theta.user_row(t.user);
    const auto hi = theta.item_row(t.pos);
    const auto hj = theta.item_row(t.neg);
    // Same evaluation order as BprGradient so both report identical losses.
    double x = 0.0;
    for (std::size_t k = 0; k < wu.size(); ++k) x += wu[k] * (hi[k] - hj[k]);
    NeumaierAdd(sum, comp, NegLogSigmoid(x));
  }
  return sum + comp;
}

template <EmbeddingSource P>
SparseGradient BprGradient(const P& theta, std::span<const Triplet> batch,
                           double* loss) {
  const std::size_t dim = theta.dim();
  RowAccumulator users(dim, theta.num_users(), batch.size());
  RowAccumulator items(dim, theta.num_items(), 2 * batch.size());
  std::vector<double> diff(dim);
  double sum = 0.0;
  double comp = 0.0;
  for (const Triplet& t : batch) {
    const auto wu = theta.user_row(t.user);
    const auto hi = theta.item_row(t.pos);
    const auto hj = theta.item_row(t.neg);
    for (std::size_t k = 0; k < dim; ++k) diff[k] = hi[k] - hj[k];
    const double x = Dot(wu, diff);
    // d/dx of -ln sigmoid(x).
    const double d = -Sigmoid(-x);
    users.Add(t.user, diff, d);
    items.Add(t.pos, wu, d);
    items.Add(t.neg, wu, -d);
    if (loss != nullptr) NeumaierAdd(sum, comp, NegLogSigmoid(x));
  }
  if (loss != nullptr) *loss = sum + comp;
  return {users.Finish(), items.Finish()};
}

template double BprLoss<EmbeddingPair>(const EmbeddingPair&,
                                       std::span<const Triplet>);
template double BprLoss<PatchedEmbedding>(const PatchedEmbedding&,
                                          std::span<const Triplet>);
template SparseGradient BprGradient<EmbeddingPair>(const EmbeddingPair&,
                                                   std::span<const Triplet>,
                                                   double*);
template SparseGradient BprGradient<PatchedEmbedding>(
    const PatchedEmbedding&, std::span<const Triplet>, double*);

void CheckShapes(const EmbeddingPair& theta, const LambdaTensor& lambda) {
  if (theta.num_users() != lambda.num_users() ||
      theta.num_items() != lambda.num_items() ||
      theta.dim() != lambda.dim() || theta.items.cols() != theta.dim()) {
    throw ConfigError(
        "lambda shape (" + std::to_string(lambda.num_users()) + ", " +
        std::to_string(lambda.num_items()) + ", " +
        std::to_string(lambda.dim()) + ") does not match parameters (" +
        std::to_string(theta.num_users()) + ", " +
        std::to_string(theta.num_items()) + ", " +
        std::to_string(theta.dim()) + ")");
  }
}

double Penalty(const EmbeddingPair& theta, const LambdaTensor& lambda) {
  CheckShapes(theta, lambda);
  const std::size_t dim = theta.dim();
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t u = 0; u < theta.num_users(); ++u) {
    const auto row = theta.users.row(u);
    for (std::size_t k = 0; k < dim; ++k) {
      NeumaierAdd(sum, comp, lambda.user_coef(u, k) * row[k] * row[k]);
    }
  }
  for (std::size_t i = 0; i < theta.num_items(); ++i) {
    const auto row = theta.items.row(i);
    for (std::size_t k = 0; k < dim; ++k) {
      NeumaierAdd(sum, comp, lambda.item_coef(i, k) * row[k] * row[k]);
    }
  }
  return sum + comp;
}

EmbeddingPair PenaltyGradient(const EmbeddingPair& theta,
                              const LambdaTensor& lambda) {
  CheckShapes(theta, lambda);
  EmbeddingPair grad(theta.num_users(), theta.num_items(), theta.dim());
  for (std::size_t u = 0; u < theta.num_users(); ++u) {
    for (std::size_t k = 0; k < theta.dim(); ++k) {
      grad.users(u, k) = 2.0 * lambda.user_coef(u, k) * theta.users(u, k);
    }
  }
  for (std::size_t i = 0; i < theta.num_items(); ++i) {
    for (std::size_t k = 0; k < theta.dim(); ++k) {
      grad.items(i, k) = 2.0 * lambda.item_coef(i, k) * theta.items(i, k);
    }
  }
  return grad;
}

EmbeddingPair Materialize(const EmbeddingPair& base,
                          const SparseEmbedding& patch) {
  EmbeddingPair out = base;
  for (std::size_t s = 0; s < patch.users.size(); ++s) {
    const auto src = patch.users.row_at(s);
    std::copy(src.begin(), src.end(),
              out.users.row(patch.users.id_at(s)).begin());
  }
  for (std::size_t s = 0; s < patch.items.size(); ++s) {
    const auto src = patch.items.row_at(s);
    std::copy(src.begin(), src.end(),
              out.items.row(patch.items.id_at(s)).begin());
  }
  return out;
}

}  // namespace lambdaopt
