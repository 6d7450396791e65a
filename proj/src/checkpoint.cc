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

#include "lambdaopt/checkpoint.h"

#include <cstring>
#include <fstream>
#include <string>

#include "binary_io.h"
#include "lambdaopt/error.h"

namespace lambdaopt {
namespace {

constexpr char kMagic[8] = {'L', 'A', 'M', 'B', 'D', 'O', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void WriteCheckpoint(std::ostream& out, const EmbeddingPair& theta,
                     const LambdaTensor& lambda, const Optimizer* optimizer) {
  using namespace binary_io;
  out.write(kMagic, sizeof(kMagic));
  Write<std::uint32_t>(out, kVersion);
  WriteMatrix(out, theta.users);
  WriteMatrix(out, theta.items);
  Write<std::uint32_t>(out, static_cast<std::uint32_t>(lambda.granularity()));
  Write<std::uint64_t>(out, lambda.num_users());
  Write<std::uint64_t>(out, lambda.num_items());
  Write<std::uint64_t>(out, lambda.dim());
  Write<std::uint64_t>(out, lambda.size());
  WriteDoubles(out, lambda.values());
  Write<std::uint8_t>(out, optimizer != nullptr);
  if (optimizer != nullptr) optimizer->Save(out);
  if (!out) throw IoError("failed to write checkpoint");
}

Checkpoint ReadCheckpoint(std::istream& in) {
  using namespace binary_io;
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a lambdaopt checkpoint");
  }
  const auto version = Read<std::uint32_t>(in);
  if (version != kVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint cp;
  cp.theta.users = ReadMatrix(in);
  cp.theta.items = ReadMatrix(in);
  if (cp.theta.users.cols() != cp.theta.items.cols()) {
    throw IoError("checkpoint embedding tables disagree on dimension");
  }
  const auto g = Read<std::uint32_t>(in);
  if (g > static_cast<std::uint32_t>(Granularity::kDui)) {
    throw IoError("bad granularity in checkpoint");
  }
  const auto nu = Read<std::uint64_t>(in);
  const auto ni = Read<std::uint64_t>(in);
  const auto dim = Read<std::uint64_t>(in);
  const auto size = Read<std::uint64_t>(in);
  if (nu != cp.theta.num_users() || ni != cp.theta.num_items() ||
      dim != cp.theta.dim()) {
    throw IoError("checkpoint lambda shape disagrees with embeddings");
  }
  cp.lambda = LambdaTensor(static_cast<Granularity>(g), nu, ni, dim);
  if (size != cp.lambda.size()) throw IoError("bad lambda size in checkpoint");
  ReadDoubles(in, cp.lambda.values());
  if (Read<std::uint8_t>(in) != 0) cp.optimizer = LoadOptimizer(in);
  return cp;
}

void SaveCheckpoint(const std::filesystem::path& path,
                    const EmbeddingPair& theta, const LambdaTensor& lambda,
                    const Optimizer* optimizer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  WriteCheckpoint(out, theta, lambda, optimizer);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return ReadCheckpoint(in);
}

void CheckCompatible(const Checkpoint& checkpoint, std::size_t num_users,
                     std::size_t num_items) {
  if (checkpoint.theta.num_users() != num_users ||
      checkpoint.theta.num_items() != num_items) {
    throw IncompatibleError(
        "checkpoint has " + std::to_string(checkpoint.theta.num_users()) +
        " users x " + std::to_string(checkpoint.theta.num_items()) +
        " items, corpus has " + std::to_string(num_users) + " x " +
        std::to_string(num_items));
  }
}

}  // namespace lambdaopt
