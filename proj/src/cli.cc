// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "fewtype/cli.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "fewtype/checkpoint.h"
#include "fewtype/dataset.h"
#include "fewtype/error.h"
#include "fewtype/eval.h"
#include "fewtype/http_provider.h"
#include "fewtype/synthetic_oracle.h"

namespace fewtype {

using nlohmann::json;
namespace fs = std::filesystem;

json RunConfigToJson(const RunConfig& cfg) {
  const Hyperparams& hp = cfg.train.hp;
  return {{"alpha", hp.alpha},
          {"epsilon", hp.epsilon},
          {"lambda", hp.lambda},
          {"lambda_new", hp.lambda_new},
          {"instances", hp.instances},
          {"epochs", hp.epochs},
          {"shots", hp.shots},
          {"lr", hp.lr},
          {"beam_width", hp.beam_width},
          {"batch_size", hp.batch_size},
          {"typing_pattern", cfg.train.templates.typing_pattern},
          {"generation_pattern", cfg.train.templates.generation_pattern},
          {"seed", cfg.train.seed},
          {"m_scope", MScopeName(cfg.train.m_scope)},
          {"regen_every", cfg.train.regen_every},
          {"train", cfg.train_path},
          {"dev", cfg.dev_path},
          {"data", cfg.data_path},
          {"hierarchy", cfg.hierarchy_path},
          {"endpoint", cfg.endpoint},
          {"oracle", cfg.oracle_path},
          {"max_in_flight", cfg.max_in_flight}};
}

std::unique_ptr<MaskedLmProvider> MakeProvider(const RunConfig& cfg) {
  if (!cfg.endpoint.empty() && !cfg.oracle_path.empty()) {
    throw ConfigError("give either --endpoint or --oracle, not both");
  }
  if (!cfg.endpoint.empty()) {
    HttpProviderOptions opts;
    opts.max_in_flight = cfg.max_in_flight;
    return std::make_unique<HttpProvider>(cfg.endpoint, opts);
  }
  if (!cfg.oracle_path.empty()) {
    return std::make_unique<SyntheticOracle>(SyntheticOracle::Load(cfg.oracle_path));
  }
  throw ConfigError("no provider configured: set --endpoint or --oracle");
}

LabelHierarchy LoadRunHierarchy(const RunConfig& cfg) {
  ExtraNames extra;
  std::set<LabelPath> labels;
  if (!cfg.hierarchy_path.empty()) {
    extra = LoadExtraNames(cfg.hierarchy_path);
    for (const auto& [key, _] : extra) labels.insert(LabelPath::Parse(key));
  } else {
    for (const auto* path : {&cfg.train_path, &cfg.dev_path, &cfg.data_path}) {
      if (path->empty()) continue;
      for (auto& l : ScanLabels(*path)) labels.insert(std::move(l));
    }
  }
  if (labels.empty()) {
    throw ConfigError("no labels: give --hierarchy or a data file");
  }
  return LabelHierarchy::Build({labels.begin(), labels.end()}, extra);
}

namespace {

FewShotSplit LoadSplit(const RunConfig& cfg, const LabelHierarchy& h) {
  if (!cfg.train_path.empty() && !cfg.dev_path.empty()) {
    return {LoadDataset(cfg.train_path, h), LoadDataset(cfg.dev_path, h)};
  }
  if (!cfg.data_path.empty()) {
    return SampleFewShot(LoadDataset(cfg.data_path, h), h, cfg.train.hp.shots,
                         cfg.train.seed);
  }
  throw ConfigError("need --train and --dev, or --data to sample from");
}

void WriteJsonl(const fs::path& path, const std::vector<json>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  for (const auto& r : rows) out << r.dump() << '\n';
}

std::vector<json> ReadJsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open {}", path));
  std::vector<json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw DataError(fmt::format("{}:{}: {}", path, lineno, e.what()));
    }
  }
  return rows;
}

CorrelationMatrix LoadMatrix(const std::string& path, MaskedLmProvider& provider) {
  return LoadCheckpoint(path, provider.vocab().Fingerprint()).matrix;
}

json InstanceToJson(const GeneratedInstance& inst) {
  return {{"source_id", inst.source_id},
          {"type_word", inst.type_word_text},
          {"surface", inst.surface},
          {"score", inst.score},
          {"k", inst.mask_count}};
}

}  // namespace

TrainResult RunTraining(const RunConfig& cfg, MaskedLmProvider& provider,
                        const std::string& resume_path) {
  LabelHierarchy h = LoadRunHierarchy(cfg);
  FewShotSplit split = LoadSplit(cfg, h);
  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);

  TrainOptions opts = cfg.train;
  opts.abort_checkpoint_path = (out / "resume.json").string();
  std::optional<Checkpoint> resume;
  if (!resume_path.empty()) {
    resume = LoadCheckpoint(resume_path, provider.vocab().Fingerprint());
  }
  Trainer trainer(provider, h, opts);
  TrainResult result = trainer.Train(split.train, split.dev, resume);

  const std::uint64_t fp = provider.vocab().Fingerprint();
  Checkpoint best{result.best, result.optimizer, fp, cfg.train.hp.epochs + 1,
                  {{"epoch", result.best_epoch}, {"dev_acc", result.best_dev_acc}}};
  SaveCheckpoint((out / "checkpoint.json").string(), best);
  Checkpoint final_ckpt{result.final_matrix, result.optimizer, fp,
                        cfg.train.hp.epochs + 1, {{"epoch", cfg.train.hp.epochs}}};
  SaveCheckpoint((out / "final.json").string(), final_ckpt);

  std::vector<json> log{{{"config", RunConfigToJson(cfg)}}};
  for (const auto& e : result.log) log.push_back(EpochLogToJson(e));
  WriteJsonl(out / "run_log.jsonl", log);
  return result;
}

namespace {

struct CliState {
  RunConfig cfg;
  std::string m_scope = "mention";
  std::string resume;
  std::string checkpoint;
  std::string input;
  std::string output;
  std::string gold;
  std::string pred;
  std::string sweep_param;
  std::vector<std::string> sweep_values;
};

void AddOptions(CLI::App& app, CliState& s) {
  RunConfig& c = s.cfg;
  Hyperparams& hp = c.train.hp;
  app.set_config("--config", "", "Run config file (TOML/INI; keys are flag names)");
  app.add_option("--seed", c.train.seed, "Seed for few-shot sampling and shuffling")
      ->capture_default_str();
  app.add_option("--alpha", hp.alpha, "Initial bias towards label-name tokens")
      ->capture_default_str();
  app.add_option("--epsilon", hp.epsilon, "Label smoothing for generated instances")
      ->capture_default_str();
  app.add_option("--lambda", hp.lambda, "Hierarchy regularizer weight")
      ->capture_default_str();
  app.add_option("--lambda_new", hp.lambda_new, "Generated-instance loss weight")
      ->capture_default_str();
  app.add_option("--instances", hp.instances, "Generated instances M")
      ->capture_default_str();
  app.add_option("--epochs", hp.epochs, "Training epochs T")->capture_default_str();
  app.add_option("--shots", hp.shots, "Shots K per label")->capture_default_str();
  app.add_option("--lr", hp.lr, "Learning rate for the correlation matrix")
      ->capture_default_str();
  app.add_option("--beam_width", hp.beam_width, "Beam width for mask filling")
      ->capture_default_str();
  app.add_option("--batch_size", hp.batch_size, "Batch size")->capture_default_str();
  app.add_option("--typing_pattern", c.train.templates.typing_pattern,
                 "Typing template")
      ->capture_default_str();
  app.add_option("--generation_pattern", c.train.templates.generation_pattern,
                 "Generation template")
      ->capture_default_str();
  app.add_option("--m_scope", s.m_scope, "Count M per 'mention' or per 'type'")
      ->check(CLI::IsMember({"mention", "type"}))
      ->capture_default_str();
  app.add_option("--regen_every", c.train.regen_every,
                 "Rebuild the generated pool every N epochs")
      ->capture_default_str();
  app.add_option("--train", c.train_path, "Training split (JSONL)");
  app.add_option("--dev", c.dev_path, "Dev split (JSONL)");
  app.add_option("--data", c.data_path, "Full dataset to sample from (JSONL)");
  app.add_option("--hierarchy", c.hierarchy_path, "Hierarchy / extra names file (JSON)");
  app.add_option("--endpoint", c.endpoint, "Inference service URL");
  app.add_option("--oracle", c.oracle_path, "Synthetic oracle file (JSON)");
  app.add_option("--max_in_flight", c.max_in_flight,
                 "Concurrent requests to the inference service")
      ->capture_default_str();
  app.add_option("--out", c.out_dir, "Output directory")->capture_default_str();
  app.add_option("--resume", s.resume, "train: resume from a checkpoint");
  app.add_option("--checkpoint", s.checkpoint, "Trained checkpoint");
  app.add_option("--input", s.input, "predict/generate: input examples (JSONL)");
  app.add_option("--output", s.output, "predict/generate: output file (JSONL)");
  app.add_option("--gold", s.gold, "eval: gold examples (JSONL)");
  app.add_option("--pred", s.pred, "eval: predictions (JSONL)");
  app.add_option("--param", s.sweep_param, "sweep: alpha | epsilon | instances")
      ->check(CLI::IsMember({"alpha", "epsilon", "instances"}));
  app.add_option("--values", s.sweep_values, "sweep: comma-separated values")
      ->delimiter(',');
}

void RequireFlag(const std::string& value, std::string_view flag,
                 std::string_view cmd) {
  if (value.empty()) {
    throw ConfigError(fmt::format("{} needs {}", cmd, flag));
  }
}

int CmdTrain(CliState& s, std::ostream& out) {
  auto provider = MakeProvider(s.cfg);
  TrainResult r = RunTraining(s.cfg, *provider, s.resume);
  out << json{{"best_epoch", r.best_epoch},
              {"best_dev_acc", r.best_dev_acc},
              {"out", s.cfg.out_dir}}
             .dump()
      << '\n';
  return kExitOk;
}

int CmdPredict(CliState& s, std::ostream& out) {
  RequireFlag(s.checkpoint, "--checkpoint", "predict");
  RequireFlag(s.input, "--input", "predict");
  auto provider = MakeProvider(s.cfg);
  CorrelationMatrix cm = LoadMatrix(s.checkpoint, *provider);
  LabelHierarchy h = LabelHierarchy::Build(cm.labels);
  auto examples = LoadDataset(s.input, h);
  std::vector<json> rows;
  for (const auto& ex : examples) {
    rows.push_back({{"id", ex.id},
                    {"label", Predict(cm, *provider, s.cfg.train.templates, ex).str()}});
  }
  std::string path = s.output.empty()
                         ? (fs::path(s.cfg.out_dir) / "predictions.jsonl").string()
                         : s.output;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  WriteJsonl(path, rows);
  out << json{{"predictions", rows.size()}, {"output", path}}.dump() << '\n';
  return kExitOk;
}

int CmdGenerate(CliState& s, std::ostream& out) {
  auto provider = MakeProvider(s.cfg);
  std::optional<CorrelationMatrix> cm;
  if (!s.checkpoint.empty()) cm = LoadMatrix(s.checkpoint, *provider);
  LabelHierarchy h =
      cm ? LabelHierarchy::Build(cm->labels,
                                 s.cfg.hierarchy_path.empty()
                                     ? ExtraNames{}
                                     : LoadExtraNames(s.cfg.hierarchy_path))
         : LoadRunHierarchy(s.cfg);
  std::vector<MentionExample> examples;
  if (!s.input.empty()) {
    examples = LoadDataset(s.input, h);
  } else {
    examples = LoadSplit(s.cfg, h).train;
  }
  Trainer trainer(*provider, h, s.cfg.train);
  Matrix u = cm ? cm->u : trainer.Initial().u;
  std::vector<json> rows;
  for (const auto& a : trainer.BuildAugmentedPool(u, examples)) {
    rows.push_back(InstanceToJson(a.instance));
  }
  std::string path = s.output.empty()
                         ? (fs::path(s.cfg.out_dir) / "instances.jsonl").string()
                         : s.output;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  WriteJsonl(path, rows);
  out << json{{"instances", rows.size()}, {"output", path}}.dump() << '\n';
  return kExitOk;
}

int CmdEval(CliState& s, std::ostream& out) {
  RequireFlag(s.gold, "--gold", "eval");
  RequireFlag(s.pred, "--pred", "eval");
  auto gold_rows = ReadJsonl(s.gold);
  auto pred_rows = ReadJsonl(s.pred);
  std::map<std::string, LabelPath> pred;
  auto id_of = [](const json& j) {
    return j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
  };
  std::set<LabelPath> labels;
  std::vector<std::pair<std::string, LabelPath>> gold;
  try {
    for (const auto& r : pred_rows) {
      LabelPath l = LabelPath::Parse(r.at("label").get<std::string>());
      labels.insert(l);
      pred.insert_or_assign(id_of(r), std::move(l));
    }
    for (const auto& r : gold_rows) {
      LabelPath l = LabelPath::Parse(r.at("label").get<std::string>());
      labels.insert(l);
      gold.emplace_back(id_of(r), std::move(l));
    }
  } catch (const json::exception& e) {
    throw DataError(fmt::format("eval: malformed row: {}", e.what()));
  } catch (const ParseError& e) {
    throw DataError(fmt::format("eval: {}", e.what()));
  }
  LabelHierarchy h = s.cfg.hierarchy_path.empty()
                         ? LabelHierarchy::Build({labels.begin(), labels.end()})
                         : LoadRunHierarchy(s.cfg);
  std::vector<std::pair<LabelPath, LabelPath>> pairs;
  for (const auto& [id, g] : gold) {
    auto it = pred.find(id);
    if (it == pred.end()) throw DataError(fmt::format("eval: no prediction for id {}", id));
    pairs.emplace_back(g, it->second);
  }
  if (pairs.empty()) throw DataError("eval: gold file is empty");
  EvalResult r = Evaluate(pairs, h);
  out << FormatEvalTable(r) << EvalResultToJson(r).dump() << '\n';
  return kExitOk;
}

int CmdSample(CliState& s, std::ostream& out) {
  RequireFlag(s.cfg.data_path, "--data", "sample");
  LabelHierarchy h = LoadRunHierarchy(s.cfg);
  FewShotSplit split = SampleFewShot(LoadDataset(s.cfg.data_path, h), h,
                                     s.cfg.train.hp.shots, s.cfg.train.seed);
  fs::create_directories(s.cfg.out_dir);
  const fs::path dir(s.cfg.out_dir);
  WriteDataset((dir / "train.jsonl").string(), split.train);
  WriteDataset((dir / "dev.jsonl").string(), split.dev);
  out << json{{"train", split.train.size()}, {"dev", split.dev.size()},
              {"out", s.cfg.out_dir}}
             .dump()
      << '\n';
  return kExitOk;
}

int CmdSweep(CliState& s, std::ostream& out) {
  RequireFlag(s.sweep_param, "--param", "sweep");
  if (s.sweep_values.empty()) throw ConfigError("sweep needs --values");
  auto provider = MakeProvider(s.cfg);
  for (const auto& value : s.sweep_values) {
    RunConfig cell = s.cfg;
    try {
      if (s.sweep_param == "alpha") {
        cell.train.hp.alpha = std::stod(value);
      } else if (s.sweep_param == "epsilon") {
        cell.train.hp.epsilon = std::stod(value);
      } else {
        cell.train.hp.instances = std::stoul(value);
      }
    } catch (const std::logic_error&) {
      throw ConfigError(fmt::format("sweep: bad value '{}'", value));
    }
    cell.out_dir =
        (fs::path(s.cfg.out_dir) / fmt::format("{}={}", s.sweep_param, value)).string();
    TrainResult r = RunTraining(cell, *provider);
    out << json{{"param", s.sweep_param},
                {"value", value},
                {"best_dev_acc", r.best_dev_acc},
                {"best_epoch", r.best_epoch},
                {"out", cell.out_dir}}
               .dump()
        << '\n';
  }
  return kExitOk;
}

void ReportError(std::ostream& err, std::string_view kind, std::string_view msg) {
  err << json{{"error", {{"kind", kind}, {"message", msg}}}}.dump() << '\n';
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Few-shot fine-grained entity typing", "fewtype"};
  CliState s;
  AddOptions(app, s);
  app.require_subcommand(1, 1);
  std::map<std::string, int (*)(CliState&, std::ostream&)> commands = {
      {"train", CmdTrain},   {"predict", CmdPredict}, {"generate", CmdGenerate},
      {"eval", CmdEval},     {"sample", CmdSample},   {"sweep", CmdSweep}};
  const std::map<std::string, std::string> help = {
      {"train", "Train the correlation matrix; writes checkpoints and a run log"},
      {"predict", "Predict labels for a JSONL file with a trained checkpoint"},
      {"generate", "Generate same-type instances for training mentions"},
      {"eval", "Strict accuracy and loose micro/macro F1 of predictions"},
      {"sample", "Draw a K-shot train/dev split"},
      {"sweep", "Train once per value of alpha, epsilon or instances"}};
  for (const auto& [name, _] : commands) {
    app.add_subcommand(name, help.at(name))->fallthrough();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << app.help();
    ReportError(err, "usage", e.what());
    return kExitUsage;
  }
  try {
    s.cfg.train.m_scope = ParseMScope(s.m_scope);
    s.cfg.train.hp.Validate();
    s.cfg.train.templates.Validate();
    const std::string name = app.get_subcommands().front()->get_name();
    return commands.at(name)(s, out);
  } catch (const ConfigError& e) {
    ReportError(err, "config", e.what());
    return kExitUsage;
  } catch (const TransportError& e) {
    ReportError(err, "provider", e.what());
    return kExitProvider;
  } catch (const Error& e) {
    ReportError(err, "data", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    ReportError(err, "internal", e.what());
    return 1;
  }
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  std::vector<const char*> argv{"fewtype"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace fewtype
