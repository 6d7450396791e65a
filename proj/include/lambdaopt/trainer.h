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

#ifndef LAMBDAOPT_TRAINER_H_
#define LAMBDAOPT_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lambdaopt/data.h"
#include "lambdaopt/error.h"
#include "lambdaopt/eval.h"
#include "lambdaopt/lambda_opt.h"
#include "lambdaopt/lambda_tensor.h"
#include "lambdaopt/mf.h"
#include "lambdaopt/optim.h"
#include "lambdaopt/sampler.h"
#include "lambdaopt/trajectory.h"

namespace lambdaopt {

enum class RegularizationMode {
  kFixed,  // lambda stays at its initial value
  kOpt,    // lambda learned from validation data every step
  kSgda,   // kOpt restricted to dimension-wise lambda and SGD updates
};

enum class OptimizerKind { kSgd, kAdam };

std::string_view ModeName(RegularizationMode mode);
RegularizationMode ParseMode(std::string_view name);
std::string_view OptimizerName(OptimizerKind kind);
OptimizerKind ParseOptimizerKind(std::string_view name);

struct TrainConfig {
  // Model.
  std::size_t dim = 32;
  double init_std = 0.01;
  std::uint64_t seed = 1;

  // Parameter optimizer.
  OptimizerKind optimizer = OptimizerKind::kAdam;
  SgdOptions sgd;
  AdamOptions adam;

  // Regularization.
  RegularizationMode mode = RegularizationMode::kOpt;
  Granularity granularity = Granularity::kDui;
  double lambda_init = 0.0;
  LambdaUpdateOptions lambda_update;
  // One lambda update every `lambda_every` parameter updates.
  std::size_t lambda_every = 1;
  PenaltyScope penalty_scope = PenaltyScope::kTouchedRows;

  // Schedule.
  std::size_t batch_size = 1024;
  std::size_t lambda_batch_size = 1024;
  std::size_t validation_batch_size = 1024;
  std::size_t epochs = 200;
  // 0 means ceil(#train events / batch_size).
  std::size_t steps_per_epoch = 0;
  // Validation metrics every `eval_every` epochs; 0 disables evaluation.
  std::size_t eval_every = 1;
  // Stop after this many evaluations without a validation-AUC improvement;
  // 0 disables early stopping.
  std::size_t patience = 20;
  std::vector<std::size_t> ks = {50, 100};

  // Trajectory grouping.
  std::vector<std::size_t> user_group_bounds = {25, 50, 100};
  std::vector<std::size_t> item_group_bounds = {15, 30, 60};
  bool record_trajectory = true;

  std::size_t eval_threads = 1;

  // Checks ranges and the mode combination: kFixed needs a global lambda,
  // kSgda needs dimension-wise lambda with SGD. Throws ConfigError.
  void Validate() const;
};

struct EvalRecord {
  int epoch = 0;
  std::uint64_t step = 0;
  double train_loss = 0.0;  // mean per triplet over the epoch
  double validation_auc = 0.0;
  std::vector<double> validation_hr;
  std::vector<double> validation_ndcg;
  double lambda_mean = 0.0;
};

struct TrainResult {
  EmbeddingPair theta;
  LambdaTensor lambda;
  std::unique_ptr<Optimizer> optimizer;
  LambdaTrajectory trajectory;
  std::vector<EvalRecord> history;
  int best_epoch = 0;
  double best_validation_auc = 0.0;
  bool early_stopped = false;
  int epochs_run = 0;
  std::uint64_t steps_run = 0;
};

// Thrown when training hits a non-finite value. Carries the parameters from
// the last completed epoch.
class TrainingAborted : public NonFiniteError {
 public:
  TrainingAborted(const std::string& message,
                  std::shared_ptr<const TrainResult> last_good)
      : NonFiniteError(message), last_good_(std::move(last_good)) {}

  const TrainResult* last_good() const { return last_good_.get(); }

 private:
  std::shared_ptr<const TrainResult> last_good_;
};

// Alternating trainer. Each step first updates theta on a train batch with
// the current lambda, then (in the adaptive modes) updates lambda from the
// hypergradient on a fresh train batch and a validation batch.
class Trainer {
 public:
  Trainer(const SplitDataset& split, const TrainConfig& config);

  // One theta update followed, when due, by one lambda update.
  void Step();
  // Returns the unregularized BPR loss of the batch used.
  double ThetaStep();
  void LambdaStep();

  // Runs the configured epochs and returns the best evaluated parameters.
  // Consumes the trainer's state.
  TrainResult Run(const std::function<void(const EvalRecord&)>& on_eval = {});

  const EmbeddingPair& theta() const { return theta_; }
  const LambdaTensor& lambda() const { return lambda_; }
  const Optimizer& optimizer() const { return *optimizer_; }
  std::uint64_t steps() const { return steps_; }
  std::size_t steps_per_epoch() const { return steps_per_epoch_; }
  const TrainConfig& config() const { return config_; }
  const GroupLabels& groups() const { return groups_; }
  bool adapts_lambda() const {
    return config_.mode != RegularizationMode::kFixed;
  }

 private:
  const SplitDataset& split_;
  TrainConfig config_;
  EmbeddingPair theta_;
  LambdaTensor lambda_;
  std::unique_ptr<Optimizer> optimizer_;
  LambdaUpdater lambda_updater_;
  TripletSampler theta_sampler_;
  std::optional<TripletSampler> lambda_train_sampler_;
  std::optional<TripletSampler> validation_sampler_;
  GroupLabels groups_;
  std::size_t steps_per_epoch_ = 1;
  std::uint64_t steps_ = 0;
  std::vector<Triplet> batch_;
  std::vector<Triplet> lambda_batch_;
  std::vector<Triplet> validation_batch_;
};

std::unique_ptr<Optimizer> MakeOptimizer(const TrainConfig& config,
                                         std::size_t num_users,
                                         std::size_t num_items);

}  // namespace lambdaopt

#endif  // LAMBDAOPT_TRAINER_H_
