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

#ifndef LAMBDAOPT_OPTIM_H_
#define LAMBDAOPT_OPTIM_H_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string_view>

#include "lambdaopt/matrix.h"
#include "lambdaopt/mf.h"

namespace lambdaopt {

struct SgdOptions {
  double learning_rate = 0.05;
};

struct AdamOptions {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Decay the second moment with beta1 instead of beta2. Off by default
  // (standard Adam).
  bool second_moment_uses_beta1 = false;
};

// Parameter update rule f(theta, g) over sparse row gradients.
//
// RealUpdate applies a step and advances the optimizer state. AssumedUpdate
// computes the same step from a copy of the state and returns the new values
// of the touched rows, leaving everything observable unchanged.
// LambdaSensitivity returns d(theta_bar)/d(lambda) per touched coordinate,
// where lambda is the coefficient governing that coordinate and the gradient
// was composed as g = g_loss + 2 * lambda * theta.
class Optimizer {
 public:
  virtual ~Optimizer() = default;

  virtual std::string_view name() const = 0;

  virtual void RealUpdate(EmbeddingPair& theta, const SparseGradient& grad) = 0;
  virtual SparseEmbedding AssumedUpdate(const EmbeddingPair& theta,
                                        const SparseGradient& grad) const = 0;
  virtual SparseEmbedding LambdaSensitivity(
      const EmbeddingPair& theta, const SparseGradient& grad) const = 0;

  virtual std::unique_ptr<Optimizer> Clone() const = 0;

  // FNV-1a over every bit of state that influences future updates.
  virtual std::uint64_t StateHash() const = 0;

  virtual void Save(std::ostream& out) const = 0;

  // Number of real updates applied so far.
  std::uint64_t steps() const { return steps_; }

 protected:
  // Throws NonFiniteError naming the step and the offending row.
  void CheckFinite(const SparseGradient& grad) const;

  std::uint64_t steps_ = 0;
};

class SgdOptimizer final : public Optimizer {
 public:
  explicit SgdOptimizer(SgdOptions options);

  std::string_view name() const override { return "sgd"; }
  void RealUpdate(EmbeddingPair& theta, const SparseGradient& grad) override;
  SparseEmbedding AssumedUpdate(const EmbeddingPair& theta,
                                const SparseGradient& grad) const override;
  SparseEmbedding LambdaSensitivity(const EmbeddingPair& theta,
                                    const SparseGradient& grad) const override;
  std::unique_ptr<Optimizer> Clone() const override;
  std::uint64_t StateHash() const override;
  void Save(std::ostream& out) const override;

  const SgdOptions& options() const { return options_; }
  void set_steps(std::uint64_t steps) { steps_ = steps; }

 private:
  SgdOptions options_;
};

// Adam with lazy moments: only rows present in a gradient have their first
// and second moments decayed and updated. The bias-correction counter is
// global.
class AdamOptimizer final : public Optimizer {
 public:
  AdamOptimizer(AdamOptions options, std::size_t num_users,
                std::size_t num_items, std::size_t dim);

  std::string_view name() const override { return "adam"; }
  void RealUpdate(EmbeddingPair& theta, const SparseGradient& grad) override;
  SparseEmbedding AssumedUpdate(const EmbeddingPair& theta,
                                const SparseGradient& grad) const override;
  SparseEmbedding LambdaSensitivity(const EmbeddingPair& theta,
                                    const SparseGradient& grad) const override;
  std::unique_ptr<Optimizer> Clone() const override;
  std::uint64_t StateHash() const override;
  void Save(std::ostream& out) const override;

  const AdamOptions& options() const { return options_; }
  const Matrix& first_moment_users() const { return s_users_; }
  const Matrix& first_moment_items() const { return s_items_; }
  const Matrix& second_moment_users() const { return r_users_; }
  const Matrix& second_moment_items() const { return r_items_; }

  // Restores state, e.g. from a checkpoint.
  void SetState(std::uint64_t steps, Matrix s_users, Matrix s_items,
                Matrix r_users, Matrix r_items);

  // sqrt(1 - beta2^t) / (1 - beta1^t) for the step with counter t.
  double BiasCorrection(std::uint64_t t) const;

 private:
  double SecondMomentDecay() const {
    return options_.second_moment_uses_beta1 ? options_.beta1 : options_.beta2;
  }

  AdamOptions options_;
  Matrix s_users_;
  Matrix s_items_;
  Matrix r_users_;
  Matrix r_items_;
};

std::unique_ptr<Optimizer> LoadOptimizer(std::istream& in);

}  // namespace lambdaopt

#endif  // LAMBDAOPT_OPTIM_H_
