// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "fewtype/generator.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "fewtype/error.h"

namespace fewtype {

std::string LowerAscii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

TokenId ArgmaxOrdinary(const TokenDistribution& d, const Vocab& vocab) {
  TokenId best = -1;
  double best_p = 0.0;
  for (std::size_t i = 0; i < d.probs.size(); ++i) {
    auto id = static_cast<TokenId>(i);
    if (vocab.is_special(id)) continue;
    if (d.probs[i] > best_p) {
      best_p = d.probs[i];
      best = id;
    }
  }
  return best;
}

TypeWordPrediction PredictTypeWord(MaskedLmProvider& provider, const Matrix& u,
                                   const TemplateSpec& spec,
                                   const MentionExample& ex) {
  const Vocab& vocab = provider.vocab();
  RenderedPrompt prompt =
      RenderTyping(spec, ex.text, ex.mention(), vocab.mask_token());
  auto dists = provider.MaskDistributions(prompt, {});
  TypeWordPrediction out;
  out.token_distribution = std::move(dists.at(0));
  out.type_word = ArgmaxOrdinary(out.token_distribution, vocab);
  if (out.type_word < 0) {
    throw ContractError(fmt::format(
        "typing prompt for {} puts no mass on ordinary tokens", ex.id));
  }
  out.label_distribution = MapToLabels(u, out.token_distribution);
  return out;
}

namespace {

bool CandidateBefore(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.token_ids < b.token_ids;
}

// Top `n` ordinary tokens by probability, lowest id first on ties, zero
// probabilities excluded.
std::vector<std::pair<TokenId, double>> TopTokens(const TokenDistribution& d,
                                                  std::size_t n) {
  std::vector<std::pair<TokenId, double>> all;
  for (std::size_t i = 0; i < d.probs.size(); ++i) {
    if (d.probs[i] > 0.0) all.emplace_back(static_cast<TokenId>(i), d.probs[i]);
  }
  auto by_prob = [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  };
  if (all.size() > n) {
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n),
                      all.end(), by_prob);
    all.resize(n);
  } else {
    std::sort(all.begin(), all.end(), by_prob);
  }
  return all;
}

}  // namespace

std::vector<Candidate> FillMasks(MaskedLmProvider& provider,
                                 const RenderedPrompt& prompt,
                                 std::size_t mask_count,
                                 std::size_t beam_width) {
  if (mask_count < 1 || beam_width < 1) {
    throw ContractError("fill: mask count and beam width must be >= 1");
  }
  if (mask_count > prompt.mask_positions.size()) {
    throw ContractError(fmt::format("fill: prompt has {} masks, asked for {}",
                                    prompt.mask_positions.size(), mask_count));
  }
  const Vocab& vocab = provider.vocab();
  std::vector<Candidate> beam(1);
  for (std::size_t step = 0; step < mask_count; ++step) {
    std::vector<MaskQuery> queries;
    queries.reserve(beam.size());
    for (const auto& c : beam) {
      MaskQuery q{prompt, {}};
      for (std::size_t i = 0; i < c.token_ids.size(); ++i) {
        q.filled[prompt.mask_positions[i]] = c.token_ids[i];
      }
      queries.push_back(std::move(q));
    }
    auto results = provider.MaskDistributionsBatch(queries);
    std::vector<Candidate> next;
    for (std::size_t b = 0; b < beam.size(); ++b) {
      // The leftmost unfilled mask is the first distribution returned.
      TokenDistribution d = ExcludeSpecial(results[b].at(0), vocab);
      for (const auto& [id, p] : TopTokens(d, beam_width)) {
        Candidate c = beam[b];
        c.token_ids.push_back(id);
        c.step_probs.push_back(p);
        c.score += std::log(p);
        next.push_back(std::move(c));
      }
    }
    std::sort(next.begin(), next.end(), CandidateBefore);
    if (next.size() > beam_width) next.resize(beam_width);
    beam = std::move(next);
    if (beam.empty()) break;
  }
  return beam;
}

std::vector<GeneratedInstance> GenerateInstances(MaskedLmProvider& provider,
                                                 const TemplateSpec& spec,
                                                 const MentionExample& ex,
                                                 TokenId type_word,
                                                 const GenerationOptions& opts) {
  if (opts.instances < 1) throw ContractError("generate: M must be >= 1");
  const Vocab& vocab = provider.vocab();
  const std::string mention = ex.mention();
  const std::size_t length = provider.Tokenize(mention).size();
  if (length < 1) {
    throw ContractError(fmt::format("generate: mention of {} tokenizes to nothing",
                                    ex.id));
  }
  const std::string type_text = vocab.Surface(type_word);

  std::set<std::string> excluded;
  for (const auto& s : opts.excluded_surfaces) excluded.insert(LowerAscii(s));
  excluded.insert(LowerAscii(mention));

  std::vector<GeneratedInstance> pooled;
  for (std::size_t k = 1; k <= length; ++k) {
    RenderedPrompt prompt = RenderGeneration(spec, ex.text, mention, type_text,
                                             k, vocab.mask_token());
    for (auto& c : FillMasks(provider, prompt, k, opts.beam_width)) {
      GeneratedInstance inst;
      inst.surface = vocab.Detokenize(c.token_ids);
      inst.source_id = ex.id;
      inst.type_word = type_word;
      inst.type_word_text = type_text;
      inst.score = c.score;
      inst.mask_count = k;
      inst.token_ids = std::move(c.token_ids);
      pooled.push_back(std::move(inst));
    }
  }
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const GeneratedInstance& a, const GeneratedInstance& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.mask_count != b.mask_count) return a.mask_count < b.mask_count;
                     return a.token_ids < b.token_ids;
                   });
  std::vector<GeneratedInstance> out;
  std::set<std::string> seen;
  for (auto& inst : pooled) {
    if (out.size() == opts.instances) break;
    std::string key = LowerAscii(inst.surface);
    if (key.find_first_not_of(" \t") == std::string::npos) continue;
    if (excluded.contains(key) || !seen.insert(key).second) continue;
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace fewtype
