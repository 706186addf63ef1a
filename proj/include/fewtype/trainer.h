// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fewtype/backend.h"
#include "fewtype/checkpoint.h"
#include "fewtype/dataset.h"
#include "fewtype/eval.h"
#include "fewtype/generator.h"
#include "fewtype/hierarchy.h"
#include "fewtype/interpreter.h"
#include "fewtype/prompts.h"

namespace fewtype {

// Whether M counts generated instances per source mention or per gold type.
enum class MScope { kMention, kType };

MScope ParseMScope(std::string_view s);
std::string_view MScopeName(MScope s);

// Smoothed target: 1 - eps + eps/n at `gold`, eps/n elsewhere.
Vector SmoothLabel(std::size_t gold, double epsilon, std::size_t num_labels);

// 0 for the first half of training, then (2t - T) / T. t is 1-based.
double BetaSchedule(std::size_t epoch, std::size_t total_epochs);

// Highest probability wins; the lowest index (smallest label path) on ties.
std::size_t ArgmaxLabel(const Vector& label_distribution);

LabelPath Predict(const CorrelationMatrix& cm, MaskedLmProvider& provider,
                  const TemplateSpec& spec, const MentionExample& ex);

struct AugmentedExample {
  GeneratedInstance instance;
  std::size_t source_gold = 0;
  // Source context with the generated surface in place of the mention.
  std::string context;
  Vector target;
};

struct TrainOptions {
  Hyperparams hp;
  TemplateSpec templates;
  std::uint64_t seed = 0;
  MScope m_scope = MScope::kMention;
  // Once augmentation is active, rebuild the pool every this many epochs.
  std::size_t regen_every = 1;
  // Where to leave a resumable checkpoint if the provider fails mid-run.
  // Empty disables it.
  std::string abort_checkpoint_path;
};

struct EpochLog {
  std::size_t epoch = 0;
  double ce = 0.0;
  double inc = 0.0;
  double exc = 0.0;
  double new_instances = 0.0;
  double beta = 0.0;
  EvalResult dev;
};

nlohmann::json EpochLogToJson(const EpochLog& e);
EpochLog EpochLogFromJson(const nlohmann::json& j);

struct TrainResult {
  // Matrix from the epoch with the best dev strict accuracy (earliest wins).
  CorrelationMatrix best;
  CorrelationMatrix final_matrix;
  OptimizerState optimizer;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_dev_acc = 0.0;
  std::vector<AugmentedExample> pool;
};

class Trainer {
 public:
  // Throws ConfigError for invalid options.
  Trainer(MaskedLmProvider& provider, const LabelHierarchy& h,
          TrainOptions options);

  // `resume` continues from a checkpoint written by an aborted run.
  TrainResult Train(const std::vector<MentionExample>& train,
                    const std::vector<MentionExample>& dev,
                    const std::optional<Checkpoint>& resume = std::nullopt);

  CorrelationMatrix Initial();

  // Generates instances for every training example and smooths each one
  // towards its source's gold label.
  std::vector<AugmentedExample> BuildAugmentedPool(
      const Matrix& u, const std::vector<MentionExample>& train);

 private:
  std::vector<Vector> TypingDistributions(
      const std::vector<std::pair<std::string, std::string>>& context_mention);

  MaskedLmProvider& provider_;
  const LabelHierarchy& h_;
  TrainOptions opts_;
};

}  // namespace fewtype
