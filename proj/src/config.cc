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

#include "lambdaopt/config.h"

#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include "binary_io.h"
#include "lambdaopt/error.h"

namespace lambdaopt {
namespace {

using nlohmann::json;

// Typed access to one object of the config document. Remembers which keys
// were read so that leftovers can be reported as unknown.
class Block {
 public:
  Block(const json& doc, std::string name) : name_(std::move(name)) {
    if (doc.contains(name_)) {
      obj_ = &doc.at(name_);
      if (!obj_->is_object()) throw ConfigError("'" + name_ + "' must be an object");
    }
  }

  bool Has(const std::string& key) const {
    return obj_ != nullptr && obj_->contains(key);
  }

  template <class T>
  std::optional<T> Get(const std::string& key) {
    seen_.insert(key);
    if (!Has(key)) return std::nullopt;
    try {
      return obj_->at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("bad value for " + name_ + "." + key + ": " +
                        obj_->at(key).dump());
    }
  }

  template <class T>
  void Read(const std::string& key, T& out) {
    if (auto v = Get<T>(key)) out = *v;
  }

  void CheckUnknown() const {
    if (obj_ == nullptr) return;
    for (const auto& [key, value] : obj_->items()) {
      if (!seen_.contains(key)) {
        throw ConfigError("unknown config key " + name_ + "." + key);
      }
    }
  }

 private:
  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> seen_;
};

char ParseDelimiter(const std::string& s) {
  if (s == "\\t" || s == "tab") return '\t';
  if (s.size() != 1) throw ConfigError("delimiter must be one character");
  return s[0];
}

std::string DelimiterName(char c) {
  return c == '\t' ? "\\t" : std::string(1, c);
}

ItemMetricMode ParseItemMode(const std::string& s) {
  if (s == "item_hit") return ItemMetricMode::kItemHit;
  if (s == "user_average") return ItemMetricMode::kUserAverage;
  throw ConfigError("item_metric must be item_hit or user_average");
}

LambdaUpdateOptions::Method ParseLambdaMethod(const std::string& s) {
  if (s == "gd") return LambdaUpdateOptions::Method::kGradientDescent;
  if (s == "adam") return LambdaUpdateOptions::Method::kAdam;
  throw ConfigError("lambda_optimizer must be gd or adam");
}

}  // namespace

RunConfig ParseRunConfig(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> kBlocks = {
      "data",         "model",      "optimizer", "regularization",
      "training",     "evaluation", "output",    "runtime"};
  for (const auto& [key, value] : doc.items()) {
    if (!kBlocks.contains(key)) throw ConfigError("unknown config block " + key);
  }

  RunConfig c;
  TrainConfig& t = c.train;

  Block data(doc, "data");
  data.Read("input", c.data.input);
  data.Read("manifest", c.data.manifest);
  if (auto d = data.Get<std::string>("delimiter")) {
    c.data.format.delimiter = ParseDelimiter(*d);
  }
  data.Read("header", c.data.format.header);
  data.Read("user_column", c.data.format.user_column);
  data.Read("item_column", c.data.format.item_column);
  data.Read("timestamp_column", c.data.format.timestamp_column);
  data.Read("min_user", c.data.min_user);
  data.Read("min_item", c.data.min_item);
  if (auto r = data.Get<std::vector<double>>("split")) {
    if (r->size() != 3) throw ConfigError("data.split needs three ratios");
    c.data.ratios = {(*r)[0], (*r)[1], (*r)[2]};
  }
  data.CheckUnknown();

  Block model(doc, "model");
  model.Read("dim", t.dim);
  model.Read("init_std", t.init_std);
  model.Read("seed", t.seed);
  model.CheckUnknown();

  Block reg(doc, "regularization");
  if (auto m = reg.Get<std::string>("mode")) t.mode = ParseMode(*m);
  const auto granularity = reg.Get<std::string>("granularity");

  Block opt(doc, "optimizer");
  const auto kind = opt.Get<std::string>("kind");
  if (t.mode == RegularizationMode::kSgda) {
    t.optimizer = OptimizerKind::kSgd;
    t.granularity = Granularity::kDim;
  } else if (t.mode == RegularizationMode::kFixed) {
    t.granularity = Granularity::kGlobal;
  }
  if (kind) t.optimizer = ParseOptimizerKind(*kind);
  if (granularity) t.granularity = ParseGranularity(*granularity);
  if (auto lr = opt.Get<double>("learning_rate")) {
    t.sgd.learning_rate = *lr;
    t.adam.learning_rate = *lr;
  } else if (t.optimizer == OptimizerKind::kSgd) {
    t.adam.learning_rate = t.sgd.learning_rate;
  } else {
    t.sgd.learning_rate = t.adam.learning_rate;
  }
  opt.Read("beta1", t.adam.beta1);
  opt.Read("beta2", t.adam.beta2);
  opt.Read("epsilon", t.adam.epsilon);
  opt.Read("second_moment_uses_beta1", t.adam.second_moment_uses_beta1);
  opt.CheckUnknown();

  reg.Read("lambda", t.lambda_init);
  reg.Read("lambda_step", t.lambda_update.step);
  reg.Read("clip", t.lambda_update.clip);
  if (auto m = reg.Get<std::string>("lambda_optimizer")) {
    t.lambda_update.method = ParseLambdaMethod(*m);
  }
  reg.Read("lambda_every", t.lambda_every);
  if (auto dense = reg.Get<bool>("dense_penalty")) {
    t.penalty_scope = *dense ? PenaltyScope::kAllRows : PenaltyScope::kTouchedRows;
  }
  reg.Read("candidates", c.candidates);
  reg.CheckUnknown();

  Block train(doc, "training");
  train.Read("epochs", t.epochs);
  train.Read("batch_size", t.batch_size);
  train.Read("lambda_batch_size", t.lambda_batch_size);
  train.Read("validation_batch_size", t.validation_batch_size);
  train.Read("steps_per_epoch", t.steps_per_epoch);
  train.Read("eval_every", t.eval_every);
  train.Read("patience", t.patience);
  train.Read("record_trajectory", t.record_trajectory);
  train.CheckUnknown();

  Block eval(doc, "evaluation");
  eval.Read("ks", t.ks);
  if (auto m = eval.Get<std::string>("item_metric")) c.item_mode = ParseItemMode(*m);
  eval.Read("user_groups", t.user_group_bounds);
  eval.Read("item_groups", t.item_group_bounds);
  eval.CheckUnknown();

  Block out(doc, "output");
  out.Read("dir", c.output_dir);
  out.CheckUnknown();

  Block runtime(doc, "runtime");
  runtime.Read("threads", c.threads);
  runtime.Read("deterministic", c.deterministic);
  runtime.CheckUnknown();
  if (c.threads == 0) throw ConfigError("runtime.threads must be positive");
  if (c.deterministic) c.threads = 1;
  t.eval_threads = c.threads;

  if (!(t.optimizer == OptimizerKind::kSgd ? t.sgd.learning_rate > 0
                                           : t.adam.learning_rate > 0)) {
    throw ConfigError("optimizer.learning_rate must be positive");
  }
  if (t.mode == RegularizationMode::kFixed && !(t.lambda_init >= 0)) {
    throw ConfigError("regularization.lambda must be >= 0");
  }
  for (double cand : c.candidates) {
    if (!(cand >= 0)) throw ConfigError("grid candidates must be >= 0");
  }
  t.Validate();
  return c;
}

void ApplyOverride(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override must look like key=value: " +
                      std::string(assignment));
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("bad override key " + key);
    if (!node->is_object()) throw ConfigError("bad override key " + key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

RunConfig LoadRunConfig(const std::filesystem::path& path,
                        const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    try {
      doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
      throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
  }
  for (const std::string& o : overrides) ApplyOverride(doc, o);
  return ParseRunConfig(doc);
}

json ToJson(const RunConfig& c) {
  const TrainConfig& t = c.train;
  json doc;
  doc["data"] = {
      {"input", c.data.input},
      {"manifest", c.data.manifest},
      {"delimiter", DelimiterName(c.data.format.delimiter)},
      {"header", c.data.format.header},
      {"user_column", c.data.format.user_column},
      {"item_column", c.data.format.item_column},
      {"timestamp_column", c.data.format.timestamp_column},
      {"min_user", c.data.min_user},
      {"min_item", c.data.min_item},
      {"split", {c.data.ratios.train, c.data.ratios.validation, c.data.ratios.test}},
  };
  doc["model"] = {{"dim", t.dim}, {"init_std", t.init_std}, {"seed", t.seed}};
  json opt = {{"kind", OptimizerName(t.optimizer)}};
  if (t.optimizer == OptimizerKind::kSgd) {
    opt["learning_rate"] = t.sgd.learning_rate;
  } else {
    opt["learning_rate"] = t.adam.learning_rate;
    opt["beta1"] = t.adam.beta1;
    opt["beta2"] = t.adam.beta2;
    opt["epsilon"] = t.adam.epsilon;
    opt["second_moment_uses_beta1"] = t.adam.second_moment_uses_beta1;
  }
  doc["optimizer"] = opt;
  const bool adam_lambda =
      t.lambda_update.method == LambdaUpdateOptions::Method::kAdam;
  doc["regularization"] = {
      {"mode", ModeName(t.mode)},
      {"granularity", GranularityName(t.granularity)},
      {"lambda", t.lambda_init},
      {"lambda_step", t.lambda_update.step},
      {"clip", t.lambda_update.clip},
      {"lambda_optimizer", adam_lambda ? "adam" : "gd"},
      {"lambda_every", t.lambda_every},
      {"dense_penalty", t.penalty_scope == PenaltyScope::kAllRows},
      {"candidates", c.candidates},
  };
  doc["training"] = {
      {"epochs", t.epochs},
      {"batch_size", t.batch_size},
      {"lambda_batch_size", t.lambda_batch_size},
      {"validation_batch_size", t.validation_batch_size},
      {"steps_per_epoch", t.steps_per_epoch},
      {"eval_every", t.eval_every},
      {"patience", t.patience},
      {"record_trajectory", t.record_trajectory},
  };
  doc["evaluation"] = {
      {"ks", t.ks},
      {"item_metric",
       c.item_mode == ItemMetricMode::kItemHit ? "item_hit" : "user_average"},
      {"user_groups", t.user_group_bounds},
      {"item_groups", t.item_group_bounds},
  };
  doc["output"] = {{"dir", c.output_dir}};
  doc["runtime"] = {{"threads", c.threads}, {"deterministic", c.deterministic}};
  return doc;
}

std::uint64_t ConfigHash(const RunConfig& config) {
  json doc = ToJson(config);
  doc.erase("output");
  doc.erase("runtime");
  doc["model"].erase("seed");
  // Grid candidates only matter to grid-search, which hashes them itself.
  doc["regularization"].erase("candidates");
  if (config.train.mode == RegularizationMode::kFixed) {
    for (const char* key :
         {"lambda_step", "clip", "lambda_optimizer", "lambda_every"}) {
      doc["regularization"].erase(key);
    }
    doc["training"].erase("lambda_batch_size");
    doc["training"].erase("validation_batch_size");
  }
  binary_io::Fnv1a h;
  h.String(doc.dump());
  return h.hash();
}

namespace {

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string RunDirName(const RunConfig& config) {
  return Hex(ConfigHash(config)) + "-s" + std::to_string(config.train.seed);
}

std::string GridDirName(const RunConfig& config) {
  binary_io::Fnv1a h;
  h.Value(ConfigHash(config));
  h.String(nlohmann::json(config.candidates).dump());
  return "grid-" + Hex(h.hash()) + "-s" + std::to_string(config.train.seed);
}

}  // namespace lambdaopt
