// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <set>
#include <string>
#include <vector>

#include "fewtype/backend.h"
#include "fewtype/dataset.h"
#include "fewtype/interpreter.h"
#include "fewtype/prompts.h"

namespace fewtype {

// A completed multi-mask fill. score is the sum of log step probabilities.
struct Candidate {
  std::vector<TokenId> token_ids;
  std::vector<double> step_probs;
  double score = 0.0;

  std::size_t mask_count() const { return token_ids.size(); }
};

struct GeneratedInstance {
  std::string surface;
  std::string source_id;
  TokenId type_word = -1;
  std::string type_word_text;
  double score = 0.0;
  std::size_t mask_count = 0;
  std::vector<TokenId> token_ids;
};

struct TypeWordPrediction {
  TokenId type_word = -1;
  Vector label_distribution;
  TokenDistribution token_distribution;
};

// Queries the typing prompt; the type word is the most probable ordinary
// token (lowest id on ties).
TypeWordPrediction PredictTypeWord(MaskedLmProvider& provider,
                                   const Matrix& u, const TemplateSpec& spec,
                                   const MentionExample& ex);

// Index of the largest ordinary-token probability, lowest id on ties;
// -1 if every ordinary token has probability 0.
TokenId ArgmaxOrdinary(const TokenDistribution& d, const Vocab& vocab);

// Left-to-right beam fill of the first `mask_count` masks of `prompt`.
// At each step every partial candidate is extended by its top `beam_width`
// ordinary tokens (special tokens removed and the rest renormalized; zero
// probabilities never extend), then the pool is cut back to `beam_width`.
// Order: score descending, then token sequence ascending.
std::vector<Candidate> FillMasks(MaskedLmProvider& provider,
                                 const RenderedPrompt& prompt,
                                 std::size_t mask_count,
                                 std::size_t beam_width);

struct GenerationOptions {
  std::size_t instances = 5;    // M
  std::size_t beam_width = 10;  // B
  // Surfaces that may never be returned (compared case-insensitively), e.g.
  // every training mention.
  std::set<std::string> excluded_surfaces;
};

// Runs FillMasks on the generation prompt for k = 1..l masks, l being the
// subword length of the mention, pools every candidate, deduplicates by
// lowercased surface, drops the source mention and excluded surfaces, and
// returns the best `instances` by raw score.
std::vector<GeneratedInstance> GenerateInstances(MaskedLmProvider& provider,
                                                 const TemplateSpec& spec,
                                                 const MentionExample& ex,
                                                 TokenId type_word,
                                                 const GenerationOptions& opts);

std::string LowerAscii(std::string_view s);

}  // namespace fewtype
