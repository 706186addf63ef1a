// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "fewtype/backend.h"
#include "fewtype/hierarchy.h"
#include "fewtype/trainer.h"

namespace fewtype {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitProvider = 4;

// Everything a run needs; each field has a flag and a config-file key of the
// same name.
struct RunConfig {
  TrainOptions train;
  std::string train_path;
  std::string dev_path;
  std::string data_path;  // sampled into train/dev when those are not given
  std::string hierarchy_path;
  std::string endpoint;
  std::string oracle_path;
  std::size_t max_in_flight = 4;
  std::string out_dir = "out";
};

nlohmann::json RunConfigToJson(const RunConfig& cfg);

std::unique_ptr<MaskedLmProvider> MakeProvider(const RunConfig& cfg);

// Label set from the hierarchy file when given, otherwise from the labels that
// appear in the run's data files.
LabelHierarchy LoadRunHierarchy(const RunConfig& cfg);

// Writes checkpoint.json, final.json and run_log.jsonl under cfg.out_dir.
TrainResult RunTraining(const RunConfig& cfg, MaskedLmProvider& provider,
                        const std::string& resume_path = "");

// Parses argv and dispatches to train | predict | generate | eval | sample |
// sweep. Never throws; failures are reported on `err` as a JSON object and
// mapped to the exit codes above.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace fewtype
