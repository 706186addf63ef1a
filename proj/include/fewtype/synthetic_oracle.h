// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "fewtype/backend.h"

namespace fewtype {

// Table-driven provider. Distributions are looked up by
// (prompt text, mask index, filled fingerprint); a query with fills that has
// no fill-specific entry falls back to the unfilled entry for the same mask,
// then to the table-wide fallback (uniform over ordinary tokens, or an error).
//
// Tokenization: whitespace split; in-vocab words map to one id, anything else
// is split into characters ("c", "##c", ...), with [UNK] for missing pieces.
//
// File layout:
//   {"vocab": {"tokens": [...], "mask_token": "[MASK]", "special_ids": [...]},
//    "fallback": "uniform" | "error",
//    "entries": [{"prompt": "...", "mask": 0, "filled": {"0": 5},
//                 "probs": [...]} | {..., "top": {"token": 0.4, ...}}]}
// A "top" entry spreads its leftover mass evenly over the ordinary tokens it
// does not list.
class SyntheticOracle : public MaskedLmProvider {
 public:
  enum class Fallback { kUniform, kError };

  explicit SyntheticOracle(Vocab vocab, Fallback fallback = Fallback::kUniform);

  static SyntheticOracle FromJson(const nlohmann::json& doc);
  static SyntheticOracle Load(const std::string& path);
  nlohmann::json ToJson() const;

  // Throws ContractError if `d` is not a normalized distribution over vocab.
  void AddEntry(const std::string& prompt, std::size_t mask,
                const Fills& filled, TokenDistribution d);
  // Sparse form; see the class comment.
  void AddTopEntry(const std::string& prompt, std::size_t mask,
                   const Fills& filled,
                   const std::vector<std::pair<TokenId, double>>& top);

  std::size_t num_entries() const { return entries_.size(); }

  const Vocab& vocab() override { return vocab_; }
  std::vector<TokenDistribution> MaskDistributions(
      const RenderedPrompt& prompt, const Fills& filled) override;
  std::vector<TokenId> Tokenize(std::string_view text) override;

  static std::string FillsFingerprint(const Fills& filled);

 private:
  struct Entry {
    std::string prompt;
    std::size_t mask;
    Fills filled;
    TokenDistribution dist;
  };
  static std::string Key(const std::string& prompt, std::size_t mask,
                         const Fills& filled);
  const TokenDistribution& Lookup(const std::string& prompt, std::size_t mask,
                                  const Fills& filled) const;

  Vocab vocab_;
  Fallback fallback_;
  TokenDistribution uniform_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace fewtype
