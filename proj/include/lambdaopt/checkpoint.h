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

#ifndef LAMBDAOPT_CHECKPOINT_H_
#define LAMBDAOPT_CHECKPOINT_H_

#include <filesystem>
#include <iosfwd>
#include <memory>

#include "lambdaopt/lambda_tensor.h"
#include "lambdaopt/mf.h"
#include "lambdaopt/optim.h"

namespace lambdaopt {

struct Checkpoint {
  EmbeddingPair theta;
  LambdaTensor lambda;
  std::unique_ptr<Optimizer> optimizer;  // may be null
};

// Binary round trip is bit-exact. Reading throws IoError on a malformed or
// truncated stream.
void WriteCheckpoint(std::ostream& out, const EmbeddingPair& theta,
                     const LambdaTensor& lambda, const Optimizer* optimizer);
Checkpoint ReadCheckpoint(std::istream& in);

void SaveCheckpoint(const std::filesystem::path& path,
                    const EmbeddingPair& theta, const LambdaTensor& lambda,
                    const Optimizer* optimizer);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Throws IncompatibleError unless the checkpoint matches the corpus shape.
void CheckCompatible(const Checkpoint& checkpoint, std::size_t num_users,
                     std::size_t num_items);

}  // namespace lambdaopt

#endif  // LAMBDAOPT_CHECKPOINT_H_
