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

// Command-line driver: ingest, train, grid-search, evaluate,
// export-trajectory and group-report.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lambdaopt/checkpoint.h"
#include "lambdaopt/config.h"
#include "lambdaopt/csv.h"
#include "lambdaopt/data.h"
#include "lambdaopt/error.h"
#include "lambdaopt/eval.h"
#include "lambdaopt/trainer.h"

namespace fs = std::filesystem;
using namespace lambdaopt;

namespace {

struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  bool deterministic = false;
};

void AddCommonFlags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON run config");
  cmd->add_option("--set", f.sets, "Override a config key, e.g. model.dim=64");
  cmd->add_option("--seed", f.seed, "Random seed (model.seed)");
  cmd->add_option("--out", f.out, "Output root directory (output.dir)");
  cmd->add_option("--threads", f.threads, "Evaluation threads");
  cmd->add_flag("--deterministic", f.deterministic,
                "Single-threaded evaluation");
}

RunConfig ResolveConfig(const CommonFlags& f,
                        std::vector<std::string> extra = {}) {
  std::vector<std::string> overrides = f.sets;
  for (std::string& s : extra) overrides.push_back(std::move(s));
  if (f.seed) overrides.push_back("model.seed=" + std::to_string(*f.seed));
  if (f.out) overrides.push_back("output.dir=" + nlohmann::json(*f.out).dump());
  if (f.threads) {
    overrides.push_back("runtime.threads=" + std::to_string(*f.threads));
  }
  if (f.deterministic) overrides.push_back("runtime.deterministic=true");
  return LoadRunConfig(f.config, overrides);
}

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string Percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f%%", 100.0 * fraction);
  return buf;
}

// ---------------------------------------------------------------------------
// ingest

int Ingest(const RunConfig& config) {
  if (config.data.input.empty()) throw ConfigError("data.input is not set");
  const InteractionLog raw =
      LoadInteractions(config.data.input, config.data.format);
  const InteractionLog log =
      FilterMinCount(raw, config.data.min_user, config.data.min_item);
  const SplitDataset split = ChronologicalSplit(log, config.data.ratios);
  SaveManifest(config.data.manifest, log, split);

  const double density =
      double(log.events.size()) / (double(log.num_users) * double(log.num_items));
  std::cout << "users=" << log.num_users << "\n"
            << "items=" << log.num_items << "\n"
            << "interactions=" << log.events.size() << "\n"
            << "density=" << Percent(density) << "\n"
            << "train=" << split.NumTrain() << "\n"
            << "validation=" << split.NumValidation() << "\n"
            << "test=" << split.NumTest() << "\n"
            << "users_without_holdout=" << split.users_without_holdout.size()
            << "\n"
            << "manifest=" << config.data.manifest << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

void WriteHistory(const fs::path& path, const std::vector<EvalRecord>& history,
                  const std::vector<std::size_t>& ks) {
  std::ofstream out = OpenOut(path);
  out << "epoch,step,train_loss,validation_auc";
  for (std::size_t k : ks) out << ",validation_hr@" << k;
  for (std::size_t k : ks) out << ",validation_ndcg@" << k;
  out << ",lambda_mean\n";
  for (const EvalRecord& r : history) {
    out << r.epoch << ',' << r.step << ',' << FormatDouble(r.train_loss) << ','
        << FormatDouble(r.validation_auc);
    for (double v : r.validation_hr) out << ',' << FormatDouble(v);
    for (double v : r.validation_ndcg) out << ',' << FormatDouble(v);
    out << ',' << FormatDouble(r.lambda_mean) << '\n';
  }
}

void WriteEntityFrequency(const fs::path& path, const SplitDataset& split,
                          const GroupLabels& groups) {
  std::ofstream out = OpenOut(path);
  out << "entity_kind,entity_id,frequency,group\n";
  for (std::size_t u = 0; u < split.num_users; ++u) {
    out << "user," << u << ',' << split.user_frequency[u] << ','
        << groups.users[u] << '\n';
  }
  for (std::size_t i = 0; i < split.num_items; ++i) {
    out << "item," << i << ',' << split.item_frequency[i] << ','
        << groups.items[i] << '\n';
  }
}

void WriteTrajectoryFiles(const fs::path& dir,
                          const LambdaTrajectory& trajectory) {
  std::ofstream traj = OpenOut(dir / "trajectory.csv");
  trajectory.WriteCsv(traj);
  std::ofstream index = OpenOut(dir / "trajectory_index.csv");
  trajectory.WriteIndexCsv(index);
}

struct RunOutcome {
  fs::path dir;
  bool ok = false;
  std::string error;
  int best_epoch = 0;
  double validation_auc = 0.0;
  MetricReport test;
};

EvalOptions TestEvalOptions(const RunConfig& config) {
  EvalOptions options;
  options.target = EvalTarget::kTest;
  options.ks = config.train.ks;
  options.item_mode = config.item_mode;
  options.threads = config.threads;
  return options;
}

// Trains one configuration and writes every artifact into its run directory.
// A non-finite abort still writes the last good state and is reported through
// the returned outcome.
RunOutcome TrainRun(const RunConfig& config, const SplitDataset& split,
                    bool verbose) {
  RunOutcome outcome;
  outcome.dir = fs::path(config.output_dir) / RunDirName(config);
  fs::create_directories(outcome.dir);
  {
    std::ofstream out = OpenOut(outcome.dir / "config.json");
    out << ToJson(config).dump(2) << '\n';
  }

  Trainer trainer(split, config.train);
  WriteEntityFrequency(outcome.dir / "entity_frequency.csv", split,
                       trainer.groups());
  auto on_eval = [&](const EvalRecord& r) {
    if (!verbose) return;
    std::cerr << "epoch " << r.epoch << " loss " << r.train_loss
              << " val_auc " << r.validation_auc << " lambda_mean "
              << r.lambda_mean << "\n";
  };

  TrainResult result;
  try {
    result = trainer.Run(on_eval);
  } catch (const TrainingAborted& e) {
    const TrainResult& last = *e.last_good();
    SaveCheckpoint(outcome.dir / "checkpoint.bin", last.theta, last.lambda,
                   last.optimizer.get());
    WriteTrajectoryFiles(outcome.dir, last.trajectory);
    WriteHistory(outcome.dir / "metrics_history.csv", last.history,
                 config.train.ks);
    std::ofstream summary = OpenOut(outcome.dir / "summary.txt");
    summary << "status=failed\nerror=" << e.what() << "\n";
    outcome.error = e.what();
    return outcome;
  }

  SaveCheckpoint(outcome.dir / "checkpoint.bin", result.theta, result.lambda,
                 result.optimizer.get());
  WriteTrajectoryFiles(outcome.dir, result.trajectory);
  WriteHistory(outcome.dir / "metrics_history.csv", result.history,
               config.train.ks);

  outcome.test = CorpusMetrics(result.theta, split, TestEvalOptions(config));
  SaveReport(outcome.dir / "test", outcome.test);
  outcome.ok = true;
  outcome.best_epoch = result.best_epoch;
  outcome.validation_auc = result.best_validation_auc;

  std::ofstream summary = OpenOut(outcome.dir / "summary.txt");
  summary << "status=ok\n"
          << "mode=" << ModeName(config.train.mode) << "\n"
          << "granularity=" << GranularityName(config.train.granularity) << "\n"
          << "optimizer=" << OptimizerName(config.train.optimizer) << "\n"
          << "epochs_run=" << result.epochs_run << "\n"
          << "steps_run=" << result.steps_run << "\n"
          << "early_stopped=" << (result.early_stopped ? 1 : 0) << "\n"
          << "best_epoch=" << result.best_epoch << "\n"
          << "best_validation_auc=" << FormatDouble(result.best_validation_auc)
          << "\n";
  WriteReportSummary(summary, outcome.test);
  return outcome;
}

int Train(const RunConfig& config) {
  const Manifest manifest = LoadManifest(config.data.manifest);
  const RunOutcome outcome = TrainRun(config, manifest.split, true);
  std::cout << "run_dir=" << outcome.dir.string() << "\n";
  if (!outcome.ok) throw NonFiniteError(outcome.error);
  WriteReportSummary(std::cout, outcome.test);
  return 0;
}

// ---------------------------------------------------------------------------
// grid-search

int GridSearch(RunConfig config) {
  if (config.candidates.empty()) throw ConfigError("candidate list is empty");
  const Manifest manifest = LoadManifest(config.data.manifest);
  config.train.mode = RegularizationMode::kFixed;
  config.train.granularity = Granularity::kGlobal;

  std::vector<RunOutcome> outcomes;
  for (double lambda : config.candidates) {
    RunConfig run = config;
    run.train.lambda_init = lambda;
    std::cerr << "candidate lambda=" << FormatDouble(lambda) << "\n";
    outcomes.push_back(TrainRun(run, manifest.split, false));
  }

  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    if (!outcomes[c].ok) continue;
    if (!best || outcomes[c].validation_auc > outcomes[*best].validation_auc) {
      best = c;
    }
  }

  const fs::path grid_dir = fs::path(config.output_dir) / GridDirName(config);
  fs::create_directories(grid_dir);
  std::ofstream table = OpenOut(grid_dir / "grid.csv");
  table << "lambda,status,best_epoch,validation_auc,test_auc,run_dir\n";
  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    const RunOutcome& o = outcomes[c];
    table << FormatDouble(config.candidates[c]) << ','
          << (o.ok ? "ok" : "failed") << ',' << o.best_epoch << ','
          << (o.ok ? FormatDouble(o.validation_auc) : "") << ','
          << (o.ok ? FormatDouble(o.test.auc) : "") << ','
          << QuoteField(o.dir.string()) << '\n';
  }
  std::cout << "grid_table=" << (grid_dir / "grid.csv").string() << "\n";
  if (!best) throw NonFiniteError("every grid candidate failed");
  std::cout << "selected_lambda=" << FormatDouble(config.candidates[*best])
            << "\n"
            << "selected_run_dir=" << outcomes[*best].dir.string() << "\n"
            << "validation_auc=" << FormatDouble(outcomes[*best].validation_auc)
            << "\n";
  WriteReportSummary(std::cout, outcomes[*best].test);
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

int Evaluate(const RunConfig& config, const fs::path& checkpoint_path,
             const fs::path& report_dir) {
  const Manifest manifest = LoadManifest(config.data.manifest);
  const Checkpoint cp = LoadCheckpoint(checkpoint_path);
  CheckCompatible(cp, manifest.split.num_users, manifest.split.num_items);
  if (manifest.split.NumTest() == 0) {
    throw ConfigError("manifest has no test interactions to evaluate");
  }
  const MetricReport report =
      CorpusMetrics(cp.theta, manifest.split, TestEvalOptions(config));
  SaveReport(report_dir, report);
  std::cout << "report_dir=" << report_dir.string() << "\n";
  WriteReportSummary(std::cout, report);
  return 0;
}

// ---------------------------------------------------------------------------
// export-trajectory

struct GroupKey {
  std::string kind;
  std::string group;
  auto operator<=>(const GroupKey&) const = default;
};

std::vector<std::vector<std::string>> ReadCsvRows(const fs::path& path,
                                                  std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  DelimitedReader reader(in, ',');
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> fields;
  bool header = true;
  while (reader.Next(fields)) {
    if (header) {
      header = false;
      continue;
    }
    if (fields.size() != columns) {
      throw ParseError(path.filename().string() + ": expected " +
                           std::to_string(columns) + " fields",
                       reader.line());
    }
    rows.push_back(fields);
  }
  return rows;
}

std::int64_t ToInt(const std::string& s, const char* what) {
  std::int64_t v = 0;
  if (!ParseInt64(s, v)) throw IoError(std::string("malformed run file: bad ") + what + " " + s);
  return v;
}

double ToDouble(const std::string& s) {
  double v = 0;
  if (!ParseDouble(s, v)) throw IoError("malformed run file: bad number " + s);
  return v;
}

int ExportTrajectory(const fs::path& run_dir, const fs::path& out_dir) {
  std::map<std::int64_t, std::int64_t> epoch_of_step;
  for (const auto& row : ReadCsvRows(run_dir / "trajectory_index.csv", 2)) {
    epoch_of_step[ToInt(row[1], "step")] = ToInt(row[0], "epoch");
  }
  // frequency per (kind, id)
  std::map<std::pair<std::string, std::int64_t>, std::int64_t> frequency;
  for (const auto& row : ReadCsvRows(run_dir / "entity_frequency.csv", 4)) {
    frequency[{row[0], ToInt(row[1], "id")}] = ToInt(row[2], "frequency");
  }

  fs::create_directories(out_dir);
  std::ofstream groups = OpenOut(out_dir / "group_trajectory.csv");
  groups << "epoch,step,entity_kind,group,lambda_mean,lambda_var\n";
  std::ofstream by_freq = OpenOut(out_dir / "frequency_lambda.csv");
  by_freq << "epoch,step,entity_kind,frequency,entities,lambda_mean\n";

  struct Acc {
    std::size_t n = 0;
    double sum = 0.0;
  };
  std::map<std::tuple<std::int64_t, std::string, std::int64_t>, Acc> freq_acc;
  auto flush = [&](std::int64_t step) {
    const std::int64_t epoch = epoch_of_step.count(step) ? epoch_of_step[step] : -1;
    for (const auto& [key, acc] : freq_acc) {
      by_freq << epoch << ',' << step << ',' << std::get<1>(key) << ','
              << std::get<2>(key) << ',' << acc.n << ','
              << FormatDouble(acc.sum / double(acc.n)) << '\n';
    }
    freq_acc.clear();
  };

  std::optional<std::int64_t> current;
  for (const auto& row : ReadCsvRows(run_dir / "trajectory.csv", 5)) {
    const std::int64_t step = ToInt(row[0], "step");
    if (current && *current != step) flush(*current);
    current = step;
    const std::string& kind = row[1];
    if (kind == "user" || kind == "item") {
      const auto it = frequency.find({kind, ToInt(row[2], "id")});
      if (it == frequency.end()) {
        throw IoError("entity " + kind + " " + row[2] +
                      " missing from entity_frequency.csv");
      }
      Acc& acc = freq_acc[{step, kind, it->second}];
      ++acc.n;
      acc.sum += ToDouble(row[3]);
      continue;
    }
    const std::int64_t epoch =
        epoch_of_step.count(step) ? epoch_of_step[step] : -1;
    groups << epoch << ',' << step << ',' << kind << ',' << row[2] << ','
           << row[3] << ',' << row[4] << '\n';
  }
  if (current) flush(*current);
  std::cout << "group_trajectory=" << (out_dir / "group_trajectory.csv").string()
            << "\n"
            << "frequency_lambda=" << (out_dir / "frequency_lambda.csv").string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// group-report

int GroupReportCmd(const RunConfig& config, const fs::path& a,
                   const fs::path& b, const std::string& out_path) {
  const Manifest manifest = LoadManifest(config.data.manifest);
  const GroupLabels groups =
      MakeGroupLabels(manifest.split, config.train.user_group_bounds,
                      config.train.item_group_bounds);
  const GroupReport report =
      GroupImprovementReport(LoadReport(a), LoadReport(b), groups);
  if (out_path.empty()) {
    WriteGroupReport(std::cout, report);
  } else {
    std::ofstream out = OpenOut(out_path);
    WriteGroupReport(out, report);
    std::cout << "group_report=" << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lambdaopt: matrix factorization with learned L2 regularization"};
  app.require_subcommand(1);

  CommonFlags ingest_flags, train_flags, grid_flags, eval_flags, export_flags,
      group_flags;

  auto* ingest = app.add_subcommand("ingest", "Load, filter and split a log");
  AddCommonFlags(ingest, ingest_flags);
  std::string input, manifest_dir;
  ingest->add_option("--input", input, "Raw interaction file (data.input)");
  ingest->add_option("--manifest", manifest_dir, "Manifest directory");

  auto* train = app.add_subcommand("train", "Train one configuration");
  AddCommonFlags(train, train_flags);
  std::string mode, granularity;
  train->add_option("--mode", mode, "fix, opt or sgda");
  train->add_option("--granularity", granularity, "global, D, U, I, DU, DI, DUI");

  auto* grid = app.add_subcommand("grid-search",
                                  "Fixed-lambda runs over the candidate list");
  AddCommonFlags(grid, grid_flags);

  auto* evaluate = app.add_subcommand("evaluate", "Test metrics of a checkpoint");
  AddCommonFlags(evaluate, eval_flags);
  std::string checkpoint, report_dir;
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint.bin")->required();
  evaluate->add_option("--report-dir", report_dir, "Where to write the report")
      ->required();

  auto* export_traj = app.add_subcommand(
      "export-trajectory", "Group and frequency tables from a run's lambdas");
  AddCommonFlags(export_traj, export_flags);
  std::string run_dir, export_dir;
  export_traj->add_option("--run", run_dir, "Run directory")->required();
  export_traj->add_option("--export-dir", export_dir,
                          "Destination (default: <run>/export)");

  auto* group = app.add_subcommand(
      "group-report", "Per frequency group relative change between reports");
  AddCommonFlags(group, group_flags);
  std::string report_a, report_b, group_out;
  group->add_option("--baseline", report_a, "Report directory A")->required();
  group->add_option("--candidate", report_b, "Report directory B")->required();
  group->add_option("--output", group_out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*ingest) {
      std::vector<std::string> extra;
      if (!input.empty()) extra.push_back("data.input=" + nlohmann::json(input).dump());
      if (!manifest_dir.empty()) {
        extra.push_back("data.manifest=" + nlohmann::json(manifest_dir).dump());
      }
      return Ingest(ResolveConfig(ingest_flags, extra));
    }
    if (*train) {
      std::vector<std::string> extra;
      if (!mode.empty()) extra.push_back("regularization.mode=" + nlohmann::json(mode).dump());
      if (!granularity.empty()) {
        extra.push_back("regularization.granularity=" +
                        nlohmann::json(granularity).dump());
      }
      return Train(ResolveConfig(train_flags, extra));
    }
    if (*grid) {
      return GridSearch(
          ResolveConfig(grid_flags, {"regularization.mode=\"fix\"",
                                     "regularization.granularity=\"global\""}));
    }
    if (*evaluate) {
      return Evaluate(ResolveConfig(eval_flags), checkpoint, report_dir);
    }
    if (*export_traj) {
      const fs::path dest =
          export_dir.empty() ? fs::path(run_dir) / "export" : fs::path(export_dir);
      return ExportTrajectory(run_dir, dest);
    }
    if (*group) {
      return GroupReportCmd(ResolveConfig(group_flags), report_a, report_b,
                            group_out);
    }
  } catch (const Error& e) {
    std::cerr << "error[" << e.code() << "]: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error[io]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
