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

#include "lambdaopt/trainer.h"

#include <cmath>
#include <numeric>
#include <string>

#include "lambdaopt/error.h"

namespace lambdaopt {
namespace {

// Seed streams; one per random source so that enabling the lambda step never
// perturbs the parameter-update stream.
enum SeedStream : std::uint64_t {
  kInitStream = 0,
  kThetaBatchStream = 1,
  kLambdaBatchStream = 2,
  kValidationBatchStream = 3,
};

struct Snapshot {
  EmbeddingPair theta;
  LambdaTensor lambda;
  std::unique_ptr<Optimizer> optimizer;
  int epoch = 0;
};

double MeanOf(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

}  // namespace

std::string_view ModeName(RegularizationMode mode) {
  switch (mode) {
    case RegularizationMode::kFixed:
      return "fix";
    case RegularizationMode::kOpt:
      return "opt";
    case RegularizationMode::kSgda:
      return "sgda";
  }
  return "?";
}

RegularizationMode ParseMode(std::string_view name) {
  if (name == "fix" || name == "fixed") return RegularizationMode::kFixed;
  if (name == "opt") return RegularizationMode::kOpt;
  if (name == "sgda") return RegularizationMode::kSgda;
  throw ConfigError("unknown regularization mode '" + std::string(name) +
                    "' (expected fix, opt or sgda)");
}

std::string_view OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

OptimizerKind ParseOptimizerKind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + std::string(name) +
                    "' (expected sgd or adam)");
}

void TrainConfig::Validate() const {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  if (!(init_std >= 0)) throw ConfigError("init_std must be nonnegative");
  if (batch_size == 0 || lambda_batch_size == 0 || validation_batch_size == 0) {
    throw ConfigError("batch sizes must be positive");
  }
  if (lambda_every == 0) throw ConfigError("lambda_every must be positive");
  if (!(lambda_init >= 0)) throw ConfigError("initial lambda must be >= 0");
  if (ks.empty()) throw ConfigError("at least one cutoff k is required");
  if (mode == RegularizationMode::kFixed &&
      granularity != Granularity::kGlobal) {
    throw ConfigError("mode fix uses a single global lambda; granularity " +
                      std::string(GranularityName(granularity)) +
                      " needs mode opt");
  }
  if (mode == RegularizationMode::kSgda &&
      (granularity != Granularity::kDim || optimizer != OptimizerKind::kSgd)) {
    throw ConfigError("mode sgda requires granularity D and optimizer sgd");
  }
  if (mode != RegularizationMode::kFixed &&
      (!(lambda_update.step >= 0) || !(lambda_update.clip > 0))) {
    throw ConfigError("lambda step must be >= 0 and clip > 0");
  }
  if (optimizer == OptimizerKind::kSgd && !(sgd.learning_rate > 0)) {
    throw ConfigError("learning rate must be positive");
  }
  if (optimizer == OptimizerKind::kAdam && !(adam.learning_rate > 0)) {
    throw ConfigError("learning rate must be positive");
  }
}

std::unique_ptr<Optimizer> MakeOptimizer(const TrainConfig& config,
                                         std::size_t num_users,
                                         std::size_t num_items) {
  if (config.optimizer == OptimizerKind::kSgd) {
    return std::make_unique<SgdOptimizer>(config.sgd);
  }
  return std::make_unique<AdamOptimizer>(config.adam, num_users, num_items,
                                         config.dim);
}

Trainer::Trainer(const SplitDataset& split, const TrainConfig& config)
    : split_(split),
      config_((config.Validate(), config)),
      theta_(EmbeddingPair::Gaussian(split.num_users, split.num_items,
                                     config.dim, config.init_std,
                                     DeriveSeed(config.seed, kInitStream))),
      lambda_(config.granularity, split.num_users, split.num_items, config.dim,
              config.lambda_init),
      optimizer_(MakeOptimizer(config, split.num_users, split.num_items)),
      lambda_updater_(config.lambda_update, lambda_.size()),
      theta_sampler_(split, Partition::kTrain,
                     DeriveSeed(config.seed, kThetaBatchStream)),
      groups_(MakeGroupLabels(split, config.user_group_bounds,
                              config.item_group_bounds)) {
  if (adapts_lambda()) {
    lambda_train_sampler_.emplace(split, Partition::kTrain,
                                  DeriveSeed(config.seed, kLambdaBatchStream));
    validation_sampler_.emplace(split, Partition::kValidation,
                                DeriveSeed(config.seed, kValidationBatchStream));
  }
  steps_per_epoch_ = config.steps_per_epoch;
  if (steps_per_epoch_ == 0) {
    steps_per_epoch_ = std::max<std::size_t>(
        1, (split.NumTrain() + config.batch_size - 1) / config.batch_size);
  }
}

double Trainer::ThetaStep() {
  theta_sampler_.SampleBatch(config_.batch_size, batch_);
  double loss = 0.0;
  const SparseGradient loss_grad = BprGradient(theta_, batch_, &loss);
  if (!std::isfinite(loss)) {
    throw NonFiniteError("non-finite training loss at step " +
                         std::to_string(steps_ + 1));
  }
  optimizer_->RealUpdate(
      theta_, ComposeGradient(loss_grad, theta_, lambda_, config_.penalty_scope));
  return loss;
}

void Trainer::LambdaStep() {
  lambda_train_sampler_->SampleBatch(config_.lambda_batch_size, lambda_batch_);
  validation_sampler_->SampleBatch(config_.validation_batch_size,
                                   validation_batch_);
  const HypergradientResult hg =
      Hypergradient(lambda_, theta_, *optimizer_, lambda_batch_,
                    validation_batch_, config_.penalty_scope);
  lambda_updater_.Apply(lambda_, hg.gradient);
}

void Trainer::Step() {
  ThetaStep();
  ++steps_;
  if (adapts_lambda() && steps_ % config_.lambda_every == 0) LambdaStep();
}

TrainResult Trainer::Run(const std::function<void(const EvalRecord&)>& on_eval) {
  TrainResult result;
  auto snapshot = [&](int epoch) {
    return Snapshot{theta_, lambda_, optimizer_->Clone(), epoch};
  };
  Snapshot best = snapshot(0);
  Snapshot last_good = snapshot(0);
  bool evaluated = false;
  std::size_t since_best = 0;
  EvalOptions eval_options;
  eval_options.target = EvalTarget::kValidation;
  eval_options.ks = config_.ks;
  eval_options.threads = config_.eval_threads;

  try {
    for (std::size_t epoch = 1; epoch <= config_.epochs; ++epoch) {
      double loss = 0.0;
      for (std::size_t s = 0; s < steps_per_epoch_; ++s) {
        loss += ThetaStep();
        ++steps_;
        if (adapts_lambda() && steps_ % config_.lambda_every == 0) {
          LambdaStep();
        }
      }
      const int ep = static_cast<int>(epoch);
      result.epochs_run = ep;
      if (config_.record_trajectory) {
        result.trajectory.Append(RecordTrajectory(lambda_, groups_, steps_, ep));
      }
      last_good = snapshot(ep);

      if (config_.eval_every == 0 || epoch % config_.eval_every != 0) continue;
      const MetricReport report = CorpusMetrics(theta_, split_, eval_options);
      EvalRecord record;
      record.epoch = ep;
      record.step = steps_;
      record.train_loss =
          loss / static_cast<double>(steps_per_epoch_ * config_.batch_size);
      record.validation_auc = report.auc;
      record.validation_hr = report.hr;
      record.validation_ndcg = report.ndcg;
      record.lambda_mean = MeanOf(lambda_.values());
      result.history.push_back(record);
      if (on_eval) on_eval(record);

      if (!evaluated || record.validation_auc > result.best_validation_auc) {
        evaluated = true;
        result.best_validation_auc = record.validation_auc;
        result.best_epoch = ep;
        best = snapshot(ep);
        since_best = 0;
      } else if (config_.patience > 0 && ++since_best >= config_.patience) {
        result.early_stopped = true;
        break;
      }
    }
  } catch (const NonFiniteError& e) {
    auto partial = std::make_shared<TrainResult>();
    partial->theta = std::move(last_good.theta);
    partial->lambda = std::move(last_good.lambda);
    partial->optimizer = std::move(last_good.optimizer);
    partial->trajectory = result.trajectory;
    partial->history = result.history;
    partial->epochs_run = last_good.epoch;
    partial->steps_run = steps_;
    throw TrainingAborted(e.what(), std::move(partial));
  }

  result.steps_run = steps_;
  if (evaluated) {
    result.theta = std::move(best.theta);
    result.lambda = std::move(best.lambda);
    result.optimizer = std::move(best.optimizer);
  } else {
    result.theta = theta_;
    result.lambda = lambda_;
    result.optimizer = optimizer_->Clone();
  }
  return result;
}

}  // namespace lambdaopt
