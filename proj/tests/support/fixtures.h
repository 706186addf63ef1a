// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fewtype/backend.h"
#include "fewtype/dataset.h"
#include "fewtype/hierarchy.h"
#include "fewtype/interpreter.h"
#include "fewtype/prompts.h"
#include "fewtype/synthetic_oracle.h"
#include "fewtype/trainer.h"

namespace fewtype::testing {

// Vocab of [PAD] [UNK] [MASK] followed by `words`; specials are 0..2.
Vocab SmallVocab(const std::vector<std::string>& words);

// Oracle over SmallVocab(words).
SyntheticOracle SmallOracle(const std::vector<std::string>& words,
                            SyntheticOracle::Fallback fallback =
                                SyntheticOracle::Fallback::kUniform);

// "w0".."w{n-1}".
std::vector<std::string> NumberedWords(std::size_t n);

LabelHierarchy Hierarchy(const std::vector<std::string>& paths);

// Random distribution over `n` entries; `zero_ids` are forced to 0.
TokenDistribution RandomDistribution(std::mt19937_64& rng, std::size_t n,
                                     const std::vector<TokenId>& zero_ids = {});
Vector RandomSimplex(std::mt19937_64& rng, std::size_t n);
Matrix RandomMatrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                    double scale = 1.0);

// Central differences of TotalLoss(EvaluateLoss(.)) in every entry of `u`.
Matrix FiniteDifference(const Matrix& u, const Batch& b, const LabelHierarchy& h,
                        const LossWeights& w, double step);

// Random token distributions with uniform gold labels and random soft
// targets.
Batch RandomBatch(std::mt19937_64& rng, std::size_t labels, std::size_t vocab,
                  std::size_t n_labeled, std::size_t n_aug);

// Random forest on `n` labels with at most two levels below each root.
LabelHierarchy RandomHierarchy(std::mt19937_64& rng, std::size_t n);

// `n` (gold, pred) pairs drawn from `labels`; a pred copies its gold with
// probability `exact_rate`, otherwise it is drawn uniformly.
std::vector<std::pair<LabelPath, LabelPath>> RandomPairs(
    std::mt19937_64& rng, const std::vector<LabelPath>& labels, std::size_t n,
    double exact_rate = 0.4);

// Two-level hierarchy of `roots` roots with `children` leaves each.
LabelHierarchy TwoLevelHierarchy(std::size_t roots, std::size_t children);

// Metrics computed from path prefixes alone, without the hierarchy index.
struct ReferenceMetrics {
  double strict = 0.0;
  double micro = 0.0;
  double macro = 0.0;
};
ReferenceMetrics ComputeReferenceMetrics(
    const std::vector<std::pair<LabelPath, LabelPath>>& pairs);

// Every length-k sequence of ordinary tokens with nonzero step probability,
// scored by summing log step probabilities under left-to-right conditioning
// (special tokens removed and each step renormalized). Sorted by score
// descending, then token sequence ascending.
struct Enumerated {
  std::vector<TokenId> ids;
  double score;
};
std::vector<Enumerated> EnumerateFills(MaskedLmProvider& provider,
                                       const RenderedPrompt& prompt, std::size_t k);

// Oracle over `ordinary` words plus [PAD] and [MASK] whose table covers every
// fill prefix of a k-mask prompt with random distributions. Roughly
// `zero_rate` of the entries are exactly zero.
SyntheticOracle RandomFillOracle(std::mt19937_64& rng, std::size_t ordinary,
                                 const RenderedPrompt& prompt, std::size_t k,
                                 double zero_rate = 0.2);

// Three labels (/animal, /animal/dog, /tool), six train and three dev
// mentions, and typing prompts that put 0.5 on the gold label's name token.
// Everything else falls back to uniform.
struct ToyWorld {
  ToyWorld();
  TrainOptions Options() const;
  // oracle.json, hierarchy.json, train.jsonl and dev.jsonl under `dir`.
  void WriteTo(const std::filesystem::path& dir) const;

  LabelHierarchy h;
  SyntheticOracle oracle;
  TemplateSpec spec;
  std::vector<MentionExample> train, dev;
};

// Root of the shipped end-to-end fixture.
std::filesystem::path E2eFixtureDir();

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

std::string ReadFile(const std::filesystem::path& p);
void WriteFile(const std::filesystem::path& p, const std::string& content);

}  // namespace fewtype::testing
