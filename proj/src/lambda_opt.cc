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

#include "lambdaopt/lambda_opt.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "lambdaopt/error.h"

namespace lambdaopt {
namespace {

// Writes loss + 2 * coef * theta for one table. With kAllRows every row of
// the table is emitted, otherwise only rows of `loss`.
template <class CoefFn>
SparseRows ComposeTable(const SparseRows& loss, const Matrix& table,
                        PenaltyScope scope, CoefFn coef) {
  const std::size_t dim = table.cols();
  SparseRows out(dim);
  out.Reserve(scope == PenaltyScope::kTouchedRows ? loss.size() : table.rows());
  auto emit = [&](std::uint32_t id, std::span<const double> g) {
    const auto w = table.row(id);
    auto o = out.Append(id);
    for (std::size_t k = 0; k < dim; ++k) {
      o[k] = (g.empty() ? 0.0 : g[k]) + 2.0 * coef(id, k) * w[k];
    }
  };
  if (scope == PenaltyScope::kTouchedRows) {
    for (std::size_t s = 0; s < loss.size(); ++s) {
      emit(loss.id_at(s), loss.row_at(s));
    }
    return out;
  }
  std::size_t s = 0;
  for (std::uint32_t id = 0; id < table.rows(); ++id) {
    if (s < loss.size() && loss.id_at(s) == id) {
      emit(id, loss.row_at(s));
      ++s;
    } else {
      emit(id, {});
    }
  }
  return out;
}

inline void NeumaierAdd(double& sum, double& comp, double x) {
  const double t = sum + x;
  if (std::abs(sum) >= std::abs(x)) {
    comp += (sum - t) + x;
  } else {
    comp += (x - t) + sum;
  }
  sum = t;
}

}  // namespace

SparseGradient ComposeGradient(const SparseGradient& loss_grad,
                               const EmbeddingPair& theta,
                               const LambdaTensor& lambda, PenaltyScope scope) {
  CheckShapes(theta, lambda);
  SparseGradient out;
  out.users = ComposeTable(
      loss_grad.users, theta.users, scope,
      [&](std::size_t u, std::size_t k) { return lambda.user_coef(u, k); });
  out.items = ComposeTable(
      loss_grad.items, theta.items, scope,
      [&](std::size_t i, std::size_t k) { return lambda.item_coef(i, k); });
  return out;
}

SparseEmbedding UpdateJacobianWrtLambda(const Optimizer& optimizer,
                                        const EmbeddingPair& theta,
                                        const SparseGradient& loss_grad,
                                        const LambdaTensor& lambda,
                                        PenaltyScope scope) {
  return optimizer.LambdaSensitivity(
      theta, ComposeGradient(loss_grad, theta, lambda, scope));
}

SparseEmbedding AssumedParameters(const Optimizer& optimizer,
                                  const EmbeddingPair& theta,
                                  const SparseGradient& loss_grad,
                                  const LambdaTensor& lambda,
                                  PenaltyScope scope) {
  return optimizer.AssumedUpdate(
      theta, ComposeGradient(loss_grad, theta, lambda, scope));
}

HypergradientResult HypergradientFromLossGrad(
    const LambdaTensor& lambda, const EmbeddingPair& theta,
    const Optimizer& optimizer, const SparseGradient& train_loss_grad,
    std::span<const Triplet> validation_batch, PenaltyScope scope) {
  const SparseGradient composed =
      ComposeGradient(train_loss_grad, theta, lambda, scope);
  const SparseEmbedding theta_bar = optimizer.AssumedUpdate(theta, composed);
  const SparseEmbedding sensitivity =
      optimizer.LambdaSensitivity(theta, composed);

  HypergradientResult result;
  const PatchedEmbedding assumed(theta, theta_bar);
  const SparseGradient val_grad =
      BprGradient(assumed, validation_batch, &result.validation_loss);

  // An entry governing a single coordinate (per-row-per-dim layouts) gets
  // exactly one term; shared entries are summed with compensation.
  const bool shared =
      lambda.user_part().kind != PartLayout::Kind::kPerRowDim ||
      lambda.item_part().kind != PartLayout::Kind::kPerRowDim;
  std::vector<double>& sum = result.gradient;
  sum.assign(lambda.size(), 0.0);
  std::vector<double> comp;
  if (shared) comp.assign(lambda.size(), 0.0);

  auto chain = [&](const SparseRows& v, const SparseRows& sens,
                   const PartLayout& part) {
    const bool single = part.kind == PartLayout::Kind::kPerRowDim;
    // Both row sets are sorted by id; walk them together.
    std::size_t a = 0;
    std::size_t b = 0;
    while (a < v.size() && b < sens.size()) {
      if (v.id_at(a) < sens.id_at(b)) {
        ++a;
      } else if (sens.id_at(b) < v.id_at(a)) {
        ++b;
      } else {
        const std::uint32_t id = v.id_at(a);
        const auto vr = v.row_at(a);
        const auto sr = sens.row_at(b);
        for (std::size_t k = 0; k < vr.size(); ++k) {
          const std::size_t e = part.index(id, k);
          if (single) {
            sum[e] = vr[k] * sr[k];
          } else {
            NeumaierAdd(sum[e], comp[e], vr[k] * sr[k]);
          }
        }
        ++a;
        ++b;
      }
    }
  };
  chain(val_grad.users, sensitivity.users, lambda.user_part());
  chain(val_grad.items, sensitivity.items, lambda.item_part());

  for (std::size_t e = 0; e < sum.size(); ++e) {
    if (shared) sum[e] += comp[e];
    if (!std::isfinite(sum[e])) {
      throw NonFiniteError("non-finite hypergradient for lambda entry " +
                           std::to_string(e));
    }
  }
  return result;
}

HypergradientResult Hypergradient(const LambdaTensor& lambda,
                                  const EmbeddingPair& theta,
                                  const Optimizer& optimizer,
                                  std::span<const Triplet> train_batch,
                                  std::span<const Triplet> validation_batch,
                                  PenaltyScope scope) {
  if (train_batch.empty() || validation_batch.empty()) {
    throw ConfigError("hypergradient needs non-empty train and validation batches");
  }
  return HypergradientFromLossGrad(lambda, theta, optimizer,
                                   BprGradient(theta, train_batch),
                                   validation_batch, scope);
}

LambdaTensor ProjectAndStep(LambdaTensor lambda, std::span<const double> grad,
                            double step, double clip) {
  if (grad.size() != lambda.size()) {
    throw ConfigError("hypergradient size does not match lambda");
  }
  auto values = lambda.values();
  for (std::size_t e = 0; e < values.size(); ++e) {
    const double g = std::clamp(grad[e], -clip, clip);
    values[e] = std::max(values[e] - step * g, 0.0);
  }
  return lambda;
}

LambdaUpdater::LambdaUpdater(LambdaUpdateOptions options, std::size_t size)
    : options_(options) {
  if (!(options_.step >= 0) || !(options_.clip > 0)) {
    throw ConfigError("lambda step must be nonnegative and clip positive");
  }
  if (options_.method == LambdaUpdateOptions::Method::kAdam) {
    m_.assign(size, 0.0);
    v_.assign(size, 0.0);
  }
}

void LambdaUpdater::Apply(LambdaTensor& lambda, std::span<const double> grad) {
  if (options_.method == LambdaUpdateOptions::Method::kGradientDescent) {
    lambda = ProjectAndStep(std::move(lambda), grad, options_.step,
                            options_.clip);
    return;
  }
  if (grad.size() != lambda.size() || m_.size() != lambda.size()) {
    throw ConfigError("hypergradient size does not match lambda");
  }
  ++t_;
  const double td = static_cast<double>(t_);
  const double correction = std::sqrt(1.0 - std::pow(options_.beta2, td)) /
                            (1.0 - std::pow(options_.beta1, td));
  auto values = lambda.values();
  for (std::size_t e = 0; e < values.size(); ++e) {
    const double g = std::clamp(grad[e], -options_.clip, options_.clip);
    m_[e] = options_.beta1 * m_[e] + (1.0 - options_.beta1) * g;
    v_[e] = options_.beta2 * v_[e] + (1.0 - options_.beta2) * g * g;
    const double delta = options_.step * correction * m_[e] /
                         (std::sqrt(v_[e]) + options_.epsilon);
    values[e] = std::max(values[e] - delta, 0.0);
  }
}

}  // namespace lambdaopt
