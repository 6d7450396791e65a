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

#ifndef LAMBDAOPT_LAMBDA_OPT_H_
#define LAMBDAOPT_LAMBDA_OPT_H_

#include <cstddef>
#include <span>
#include <vector>

#include "lambdaopt/lambda_tensor.h"
#include "lambdaopt/mf.h"
#include "lambdaopt/optim.h"
#include "lambdaopt/types.h"

namespace lambdaopt {

// Which rows receive the 2 * lambda * theta term in a regularized gradient.
enum class PenaltyScope {
  kTouchedRows,  // rows present in the loss gradient only
  kAllRows,      // every row of both tables
};

// g = loss_grad + 2 * broadcast(lambda) * theta over the rows in scope.
SparseGradient ComposeGradient(const SparseGradient& loss_grad,
                               const EmbeddingPair& theta,
                               const LambdaTensor& lambda,
                               PenaltyScope scope = PenaltyScope::kTouchedRows);

// d(theta_bar)/d(lambda) per coordinate of the rows an assumed step touches,
// where theta_bar = f(theta, ComposeGradient(loss_grad, theta, lambda)).
SparseEmbedding UpdateJacobianWrtLambda(
    const Optimizer& optimizer, const EmbeddingPair& theta,
    const SparseGradient& loss_grad, const LambdaTensor& lambda,
    PenaltyScope scope = PenaltyScope::kTouchedRows);

// Rows of the assumed next-step parameters for a given lambda. The optimizer
// and theta are left untouched.
SparseEmbedding AssumedParameters(
    const Optimizer& optimizer, const EmbeddingPair& theta,
    const SparseGradient& loss_grad, const LambdaTensor& lambda,
    PenaltyScope scope = PenaltyScope::kTouchedRows);

struct HypergradientResult {
  // dL_val / d lambda, one entry per free coefficient.
  std::vector<double> gradient;
  // Validation loss at the assumed parameters.
  double validation_loss = 0.0;
};

// Gradient of the validation BPR loss, evaluated at the parameters one
// assumed optimizer step ahead, with respect to every lambda entry.
//
// The train batch supplies the unregularized gradient for the assumed step;
// coordinates outside that step do not depend on lambda and contribute zero.
HypergradientResult Hypergradient(
    const LambdaTensor& lambda, const EmbeddingPair& theta,
    const Optimizer& optimizer, std::span<const Triplet> train_batch,
    std::span<const Triplet> validation_batch,
    PenaltyScope scope = PenaltyScope::kTouchedRows);

// Same, reusing an already computed unregularized train gradient.
HypergradientResult HypergradientFromLossGrad(
    const LambdaTensor& lambda, const EmbeddingPair& theta,
    const Optimizer& optimizer, const SparseGradient& train_loss_grad,
    std::span<const Triplet> validation_batch,
    PenaltyScope scope = PenaltyScope::kTouchedRows);

// Clips G to [-clip, clip], takes a plain gradient step and clamps negative
// coefficients to zero.
LambdaTensor ProjectAndStep(LambdaTensor lambda, std::span<const double> grad,
                            double step, double clip);

struct LambdaUpdateOptions {
  enum class Method { kGradientDescent, kAdam };

  Method method = Method::kGradientDescent;
  double step = 1e-3;
  double clip = 1.0;
  // Only used by kAdam.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Owns the state of the lambda optimizer. Every update ends with the same
// clip-then-project treatment as ProjectAndStep.
class LambdaUpdater {
 public:
  LambdaUpdater(LambdaUpdateOptions options, std::size_t size);

  void Apply(LambdaTensor& lambda, std::span<const double> grad);

  const LambdaUpdateOptions& options() const { return options_; }

 private:
  LambdaUpdateOptions options_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

}  // namespace lambdaopt

#endif  // LAMBDAOPT_LAMBDA_OPT_H_
