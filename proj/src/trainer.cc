// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "fewtype/trainer.h"

#include <algorithm>
#include <map>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "fewtype/error.h"

namespace fewtype {

using nlohmann::json;

MScope ParseMScope(std::string_view s) {
  if (s == "mention") return MScope::kMention;
  if (s == "type") return MScope::kType;
  throw ConfigError(fmt::format("m_scope must be 'mention' or 'type', got '{}'", s));
}

std::string_view MScopeName(MScope s) {
  return s == MScope::kMention ? "mention" : "type";
}

Vector SmoothLabel(std::size_t gold, double epsilon, std::size_t num_labels) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw ConfigError(fmt::format("epsilon {} is outside [0,1)", epsilon));
  }
  if (gold >= num_labels) throw ContractError("smooth_label: gold out of range");
  const double off = epsilon / static_cast<double>(num_labels);
  Vector out = Vector::Constant(static_cast<Eigen::Index>(num_labels), off);
  out(static_cast<Eigen::Index>(gold)) = 1.0 - epsilon + off;
  return out;
}

double BetaSchedule(std::size_t epoch, std::size_t total_epochs) {
  if (epoch < 1 || epoch > total_epochs) {
    throw ContractError(fmt::format("beta: epoch {} outside 1..{}", epoch,
                                    total_epochs));
  }
  if (2 * epoch <= total_epochs) return 0.0;
  return static_cast<double>(2 * epoch - total_epochs) /
         static_cast<double>(total_epochs);
}

std::size_t ArgmaxLabel(const Vector& q) {
  std::size_t best = 0;
  for (Eigen::Index y = 1; y < q.size(); ++y) {
    if (q(y) > q(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(y);
  }
  return best;
}

LabelPath Predict(const CorrelationMatrix& cm, MaskedLmProvider& provider,
                  const TemplateSpec& spec, const MentionExample& ex) {
  RenderedPrompt prompt = RenderTyping(spec, ex.text, ex.mention(),
                                       provider.vocab().mask_token());
  auto dists = provider.MaskDistributions(prompt, {});
  return cm.labels.at(ArgmaxLabel(MapToLabels(cm.u, dists.at(0))));
}

json EpochLogToJson(const EpochLog& e) {
  return {{"epoch", e.epoch},
          {"ce", e.ce},
          {"inc", e.inc},
          {"exc", e.exc},
          {"new", e.new_instances},
          {"beta", e.beta},
          {"dev_acc", e.dev.strict_acc},
          {"dev_micro", e.dev.loose_micro_f1},
          {"dev_macro", e.dev.loose_macro_f1}};
}

EpochLog EpochLogFromJson(const json& j) {
  EpochLog e;
  e.epoch = j.at("epoch").get<std::size_t>();
  e.ce = j.at("ce").get<double>();
  e.inc = j.at("inc").get<double>();
  e.exc = j.at("exc").get<double>();
  e.new_instances = j.at("new").get<double>();
  e.beta = j.at("beta").get<double>();
  e.dev.strict_acc = j.at("dev_acc").get<double>();
  e.dev.loose_micro_f1 = j.at("dev_micro").get<double>();
  e.dev.loose_macro_f1 = j.at("dev_macro").get<double>();
  return e;
}

Trainer::Trainer(MaskedLmProvider& provider, const LabelHierarchy& h,
                 TrainOptions options)
    : provider_(provider), h_(h), opts_(std::move(options)) {
  opts_.hp.Validate();
  opts_.templates.Validate();
  if (opts_.regen_every < 1) throw ConfigError("regen_every must be >= 1");
}

CorrelationMatrix Trainer::Initial() {
  return InitCorrelation(h_, provider_.vocab().size(),
                         ResolveNameTokens(h_, provider_), opts_.hp.alpha);
}

std::vector<Vector> Trainer::TypingDistributions(
    const std::vector<std::pair<std::string, std::string>>& context_mention) {
  const Vocab& vocab = provider_.vocab();
  std::vector<MaskQuery> queries;
  queries.reserve(context_mention.size());
  for (const auto& [context, mention] : context_mention) {
    queries.push_back(
        {RenderTyping(opts_.templates, context, mention, vocab.mask_token()), {}});
  }
  auto results = provider_.MaskDistributionsBatch(queries);
  std::vector<Vector> out;
  out.reserve(results.size());
  for (auto& r : results) {
    const auto& probs = r.at(0).probs;
    if (probs.size() != vocab.size()) {
      throw TransportError("provider returned a distribution of the wrong size");
    }
    out.push_back(Eigen::Map<const Vector>(probs.data(),
                                           static_cast<Eigen::Index>(probs.size())));
  }
  return out;
}

std::vector<AugmentedExample> Trainer::BuildAugmentedPool(
    const Matrix& u, const std::vector<MentionExample>& train) {
  GenerationOptions gen;
  gen.instances = opts_.hp.instances;
  gen.beam_width = opts_.hp.beam_width;
  for (const auto& ex : train) gen.excluded_surfaces.insert(ex.mention());

  std::vector<AugmentedExample> pool;
  for (const auto& ex : train) {
    TypeWordPrediction tw = PredictTypeWord(provider_, u, opts_.templates, ex);
    const std::size_t gold = h_.IndexOf(ex.label);
    for (auto& inst :
         GenerateInstances(provider_, opts_.templates, ex, tw.type_word, gen)) {
      AugmentedExample a;
      a.context = ex.WithMention(inst.surface);
      a.instance = std::move(inst);
      a.source_gold = gold;
      a.target = SmoothLabel(gold, opts_.hp.epsilon, h_.size());
      pool.push_back(std::move(a));
    }
  }
  if (opts_.m_scope == MScope::kType) {
    // Keep the best M per gold type, first occurrence of a surface only.
    std::stable_sort(pool.begin(), pool.end(),
                     [](const AugmentedExample& a, const AugmentedExample& b) {
                       if (a.source_gold != b.source_gold) {
                         return a.source_gold < b.source_gold;
                       }
                       return a.instance.score > b.instance.score;
                     });
    std::vector<AugmentedExample> kept;
    std::map<std::size_t, std::set<std::string>> seen;
    for (auto& a : pool) {
      auto& s = seen[a.source_gold];
      if (s.size() >= opts_.hp.instances) continue;
      if (!s.insert(LowerAscii(a.instance.surface)).second) continue;
      kept.push_back(std::move(a));
    }
    pool = std::move(kept);
  }
  return pool;
}

TrainResult Trainer::Train(const std::vector<MentionExample>& train,
                           const std::vector<MentionExample>& dev,
                           const std::optional<Checkpoint>& resume) {
  if (train.empty()) throw DataError("training set is empty");
  if (dev.empty()) throw DataError("dev set is empty");
  const Hyperparams& hp = opts_.hp;
  const std::size_t T = hp.epochs;
  const std::size_t batches_per_epoch = (train.size() + hp.batch_size - 1) / hp.batch_size;

  std::vector<std::pair<std::string, std::string>> train_cm, dev_cm;
  for (const auto& ex : train) train_cm.emplace_back(ex.text, ex.mention());
  for (const auto& ex : dev) dev_cm.emplace_back(ex.text, ex.mention());
  const std::vector<Vector> train_dists = TypingDistributions(train_cm);
  const std::vector<Vector> dev_dists = TypingDistributions(dev_cm);
  std::vector<std::size_t> train_gold, dev_gold;
  for (const auto& ex : train) train_gold.push_back(h_.IndexOf(ex.label));
  for (const auto& ex : dev) dev_gold.push_back(h_.IndexOf(ex.label));

  TrainResult result;
  CorrelationMatrix cm;
  OptimizerState opt;
  std::size_t first_epoch = 1;
  if (resume) {
    cm = resume->matrix;
    if (cm.labels != h_.labels() || cm.vocab_size() != provider_.vocab().size()) {
      throw DataError("checkpoint does not match the hierarchy or vocabulary");
    }
    if (!resume->optimizer) throw DataError("checkpoint has no optimizer state");
    opt = *resume->optimizer;
    first_epoch = resume->next_epoch;
    for (const auto& e : resume->extra.value("log", json::array())) {
      result.log.push_back(EpochLogFromJson(e));
    }
    result.best_epoch = resume->extra.value("best_epoch", std::size_t{0});
    result.best_dev_acc = resume->extra.value("best_dev_acc", 0.0);
    result.best = cm;
    if (resume->extra.contains("best_u")) {
      result.best.u = MatrixFromJson(resume->extra["best_u"]);
    }
  } else {
    cm = Initial();
    opt = OptimizerState::Create(cm.u, hp.lr,
                                 static_cast<std::int64_t>(T * batches_per_epoch));
    result.best = cm;
  }

  const bool augment = hp.lambda_new > 0.0;
  const std::size_t first_active = T / 2 + 1;
  std::vector<AugmentedExample> pool;
  std::vector<Vector> pool_dists;
  const LossWeights base{hp.lambda, hp.lambda_new, 0.0};

  for (std::size_t epoch = first_epoch; epoch <= T; ++epoch) {
    const CorrelationMatrix epoch_start = cm;
    const OptimizerState opt_start = opt;
    try {
      const double beta = BetaSchedule(epoch, T);
      if (beta == 0.0 || !augment) {
        pool.clear();
        pool_dists.clear();
      } else if ((epoch - first_active) % opts_.regen_every == 0 || pool.empty()) {
        pool = BuildAugmentedPool(cm.u, train);
        std::vector<std::pair<std::string, std::string>> aug_cm;
        for (const auto& a : pool) aug_cm.emplace_back(a.context, a.instance.surface);
        pool_dists = TypingDistributions(aug_cm);
        spdlog::debug("epoch {}: augmented pool of {}", epoch, pool.size());
      }

      std::vector<std::size_t> order(train.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::seed_seq seq{static_cast<std::uint64_t>(opts_.seed),
                        static_cast<std::uint64_t>(epoch)};
      std::mt19937_64 rng(seq);
      std::shuffle(order.begin(), order.end(), rng);

      Batch batch;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        batch.augmented.push_back({pool_dists[i], pool[i].target});
      }
      LossWeights w = base;
      w.beta = beta;
      EpochLog entry;
      entry.epoch = epoch;
      entry.beta = beta;
      for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
        batch.labeled.clear();
        for (std::size_t i = start; i < std::min(order.size(), start + hp.batch_size); ++i) {
          batch.labeled.push_back({train_dists[order[i]], train_gold[order[i]]});
        }
        LossGradient lg = GradTotal(cm.u, batch, h_, w);
        AdamStep(cm.u, opt, lg.grad);
        entry.ce += lg.terms.ce;
        entry.inc += lg.terms.inc;
        entry.exc += lg.terms.exc;
        entry.new_instances += lg.terms.new_instances;
      }
      const auto nb = static_cast<double>(batches_per_epoch);
      entry.ce /= nb;
      entry.inc /= nb;
      entry.exc /= nb;
      entry.new_instances /= nb;

      Matrix p = ColumnSoftmax(cm.u);
      std::vector<std::pair<LabelPath, LabelPath>> pairs;
      for (std::size_t i = 0; i < dev.size(); ++i) {
        pairs.emplace_back(h_.label(dev_gold[i]),
                           h_.label(ArgmaxLabel(MapToLabels(p, dev_dists[i]))));
      }
      entry.dev = Evaluate(pairs, h_);
      spdlog::info("epoch {:>3} ce {:.4f} inc {:.4f} exc {:.4f} new {:.4f} "
                   "beta {:.2f} dev acc {:.4f}",
                   epoch, entry.ce, entry.inc, entry.exc, entry.new_instances,
                   beta, entry.dev.strict_acc);
      if (result.best_epoch == 0 || entry.dev.strict_acc > result.best_dev_acc) {
        result.best_epoch = epoch;
        result.best_dev_acc = entry.dev.strict_acc;
        result.best = cm;
      }
      result.log.push_back(entry);
    } catch (const TransportError&) {
      if (!opts_.abort_checkpoint_path.empty()) {
        Checkpoint ckpt;
        ckpt.matrix = epoch_start;
        ckpt.optimizer = opt_start;
        ckpt.vocab_fingerprint = provider_.vocab().Fingerprint();
        ckpt.next_epoch = epoch;
        json log = json::array();
        for (const auto& e : result.log) log.push_back(EpochLogToJson(e));
        ckpt.extra = {{"log", log},
                      {"best_epoch", result.best_epoch},
                      {"best_dev_acc", result.best_dev_acc},
                      {"best_u", MatrixToJson(result.best.u)}};
        SaveCheckpoint(opts_.abort_checkpoint_path, ckpt);
        spdlog::error("provider failed in epoch {}; resumable checkpoint at {}",
                      epoch, opts_.abort_checkpoint_path);
      }
      throw;
    }
  }
  result.final_matrix = cm;
  result.optimizer = opt;
  result.pool = std::move(pool);
  return result;
}

}  // namespace fewtype
