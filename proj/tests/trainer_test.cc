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

#include <gtest/gtest.h>

#include "lambdaopt/error.h"
#include "lambdaopt/eval.h"
#include "support/fixtures.h"

namespace lambdaopt {
namespace {

using testing::RandomSplit;

TrainConfig Small() {
  TrainConfig c;
  c.dim = 8;
  c.init_std = 0.1;
  c.seed = 3;
  c.batch_size = 32;
  c.lambda_batch_size = 32;
  c.validation_batch_size = 32;
  c.epochs = 3;
  c.ks = {5};
  c.user_group_bounds = {10};
  c.item_group_bounds = {5};
  c.adam.learning_rate = 0.01;
  return c;
}

TEST(TrainConfig, ValidatesModeCombinations) {
  TrainConfig c = Small();
  c.mode = RegularizationMode::kFixed;
  c.granularity = Granularity::kDui;
  EXPECT_THROW(c.Validate(), ConfigError);
  c.granularity = Granularity::kGlobal;
  EXPECT_NO_THROW(c.Validate());

  c.mode = RegularizationMode::kSgda;
  c.granularity = Granularity::kDim;
  c.optimizer = OptimizerKind::kAdam;
  EXPECT_THROW(c.Validate(), ConfigError);
  c.optimizer = OptimizerKind::kSgd;
  EXPECT_NO_THROW(c.Validate());
  c.granularity = Granularity::kDui;
  EXPECT_THROW(c.Validate(), ConfigError);

  c = Small();
  c.lambda_init = -1.0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = Small();
  c.lambda_update.clip = 0.0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = Small();
  c.batch_size = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = Small();
  c.ks.clear();
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST(ParseMode, Names) {
  EXPECT_EQ(ParseMode("fix"), RegularizationMode::kFixed);
  EXPECT_EQ(ParseMode("opt"), RegularizationMode::kOpt);
  EXPECT_EQ(ParseMode("sgda"), RegularizationMode::kSgda);
  EXPECT_EQ(ModeName(RegularizationMode::kSgda), "sgda");
  EXPECT_THROW(ParseMode("auto"), ConfigError);
  EXPECT_THROW(ParseOptimizerKind("rmsprop"), ConfigError);
}

TEST(Trainer, DefaultStepsPerEpochCoverTrainingSet) {
  const SplitDataset split = RandomSplit(30, 40, 10, 1);
  const Trainer t(split, Small());
  EXPECT_EQ(t.steps_per_epoch(), (300u + 31u) / 32u);
}

TEST(Trainer, ZeroLambdaStepMatchesFixedMode) {
  const SplitDataset split = RandomSplit(30, 40, 10, 1);
  TrainConfig fixed = Small();
  fixed.mode = RegularizationMode::kFixed;
  fixed.granularity = Granularity::kGlobal;
  fixed.lambda_init = 0.05;
  TrainConfig opt = fixed;
  opt.mode = RegularizationMode::kOpt;
  opt.lambda_update.step = 0.0;
  Trainer a(split, fixed);
  Trainer b(split, opt);
  for (int s = 0; s < 25; ++s) {
    a.Step();
    b.Step();
  }
  EXPECT_EQ(a.theta(), b.theta());
  EXPECT_EQ(a.optimizer().StateHash(), b.optimizer().StateHash());
  EXPECT_EQ(b.lambda(), a.lambda());
}

TEST(Trainer, LambdaStepTouchesOnlyLambda) {
  const SplitDataset split = RandomSplit(30, 40, 10, 2);
  TrainConfig c = Small();
  c.lambda_update.step = 0.1;
  Trainer t(split, c);
  for (int s = 0; s < 5; ++s) t.ThetaStep();
  const EmbeddingPair theta = t.theta();
  const std::uint64_t hash = t.optimizer().StateHash();
  const LambdaTensor before = t.lambda();
  t.LambdaStep();
  EXPECT_EQ(t.theta(), theta);
  EXPECT_EQ(t.optimizer().StateHash(), hash);
  EXPECT_NE(t.lambda(), before);
  for (double v : t.lambda().values()) EXPECT_GE(v, 0.0);
}

TEST(Trainer, LambdaEverySkipsSteps) {
  const SplitDataset split = RandomSplit(30, 40, 10, 2);
  TrainConfig c = Small();
  c.lambda_update.step = 0.1;
  c.lambda_every = 3;
  Trainer t(split, c);
  t.Step();
  t.Step();
  EXPECT_EQ(t.lambda(), LambdaTensor(Granularity::kDui, 30, 40, 8));
  t.Step();
  EXPECT_NE(t.lambda(), LambdaTensor(Granularity::kDui, 30, 40, 8));
}

TEST(Trainer, RunIsDeterministic) {
  const SplitDataset split = RandomSplit(30, 40, 10, 3);
  TrainConfig c = Small();
  c.lambda_update.step = 0.05;
  const TrainResult a = Trainer(split, c).Run();
  const TrainResult b = Trainer(split, c).Run();
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.lambda, b.lambda);
  ASSERT_EQ(a.history.size(), 3u);
  EXPECT_EQ(a.history.back().validation_auc, b.history.back().validation_auc);
  EXPECT_EQ(a.trajectory.rows().size(), 3u);
}

TEST(Trainer, EarlyStoppingRestoresBestEpoch) {
  const SplitDataset split = RandomSplit(40, 60, 8, 4);
  TrainConfig c = Small();
  c.mode = RegularizationMode::kFixed;
  c.granularity = Granularity::kGlobal;
  c.dim = 16;
  c.adam.learning_rate = 0.1;
  c.epochs = 200;
  c.patience = 3;
  const TrainResult r = Trainer(split, c).Run();
  ASSERT_TRUE(r.early_stopped);
  EXPECT_EQ(r.epochs_run, r.best_epoch + 3);
  EXPECT_EQ(static_cast<int>(r.history.size()), r.epochs_run);
  for (const EvalRecord& e : r.history) {
    EXPECT_LE(e.validation_auc, r.best_validation_auc);
  }
  EvalOptions o;
  o.target = EvalTarget::kValidation;
  o.ks = c.ks;
  EXPECT_EQ(CorpusMetrics(r.theta, split, o).auc, r.best_validation_auc);
}

TEST(Trainer, NonFiniteLossAbortsWithLastGoodState) {
  const SplitDataset split = RandomSplit(30, 40, 10, 5);
  TrainConfig c = Small();
  c.mode = RegularizationMode::kFixed;
  c.granularity = Granularity::kGlobal;
  c.optimizer = OptimizerKind::kSgd;
  c.sgd.learning_rate = 0.5;
  c.lambda_init = 1e300;
  c.epochs = 5;
  try {
    Trainer(split, c).Run();
    FAIL() << "expected TrainingAborted";
  } catch (const TrainingAborted& e) {
    ASSERT_NE(e.last_good(), nullptr);
    EXPECT_EQ(e.last_good()->epochs_run, 0);
    EXPECT_EQ(e.last_good()->theta.num_users(), 30u);
  }
}

}  // namespace
}  // namespace lambdaopt
