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

#ifndef LAMBDAOPT_CONFIG_H_
#define LAMBDAOPT_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lambdaopt/data.h"
#include "lambdaopt/eval.h"
#include "lambdaopt/trainer.h"

namespace lambdaopt {

struct DataConfig {
  std::string input;                // raw interaction log
  std::string manifest = "manifest";  // directory written by ingest
  LogFormat format;
  std::size_t min_user = 20;
  std::size_t min_item = 20;
  SplitRatios ratios;
};

struct RunConfig {
  DataConfig data;
  TrainConfig train;
  // Fixed-lambda grid for grid-search.
  std::vector<double> candidates = {10, 1, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 0};
  ItemMetricMode item_mode = ItemMetricMode::kUserAverage;
  std::string output_dir = "runs";
  std::size_t threads = 1;
  bool deterministic = false;
};

// Parses a config document. Absent keys take defaults; in mode "fix" the
// granularity defaults to global and in mode "sgda" to D with SGD. Unknown
// keys and explicit conflicts throw ConfigError.
RunConfig ParseRunConfig(const nlohmann::json& doc);

// Reads `path` (empty: all defaults) and applies "dotted.key=value"
// overrides in order. Values are parsed as JSON, falling back to a string.
RunConfig LoadRunConfig(const std::filesystem::path& path,
                        const std::vector<std::string>& overrides = {});
void ApplyOverride(nlohmann::json& doc, std::string_view assignment);

// Fully populated, canonical form of `config`.
nlohmann::json ToJson(const RunConfig& config);

// FNV-1a over the canonical form without output, runtime and seed fields.
std::uint64_t ConfigHash(const RunConfig& config);
// "<16 hex digits of the hash>-s<seed>".
std::string RunDirName(const RunConfig& config);
// "grid-<hash>-s<seed>" where the hash also covers the candidate list.
std::string GridDirName(const RunConfig& config);

}  // namespace lambdaopt

#endif  // LAMBDAOPT_CONFIG_H_
