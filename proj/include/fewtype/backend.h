// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fewtype {

using TokenId = std::int32_t;

// How subword pieces mark word boundaries. Detected from the token list.
enum class SubwordStyle {
  kWordPiece,     // "##" marks a continuation piece
  kByteLevelBpe,  // "Ġ" marks a piece that starts a new word
  kSentencePiece  // "▁" marks a piece that starts a new word
};

class Vocab {
 public:
  Vocab() = default;
  // Throws ContractError on duplicate tokens, a missing mask token, or special
  // ids out of range.
  Vocab(std::vector<std::string> tokens, std::string mask_token,
        std::set<TokenId> special_ids);

  std::size_t size() const { return id_to_token_.size(); }
  const std::vector<std::string>& tokens() const { return id_to_token_; }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view token) const;
  const std::string& mask_token() const { return mask_token_; }
  TokenId mask_id() const { return mask_id_; }
  const std::set<TokenId>& special_ids() const { return special_ids_; }
  bool is_special(TokenId id) const { return special_ids_.contains(id); }
  SubwordStyle style() const { return style_; }

  // Joins pieces into surface text according to style().
  std::string Detokenize(std::span<const TokenId> ids) const;
  // A single piece with its boundary marker stripped.
  std::string Surface(TokenId id) const;

  // FNV-1a over the newline-joined token list.
  std::uint64_t Fingerprint() const;

  bool operator==(const Vocab& other) const;

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
  std::string mask_token_;
  TokenId mask_id_ = -1;
  std::set<TokenId> special_ids_;
  SubwordStyle style_ = SubwordStyle::kWordPiece;
};

// A template rendered to text. mask_positions are the mask occurrence indices
// 0..n-1, left to right.
struct RenderedPrompt {
  std::string text;
  std::vector<std::size_t> mask_positions;
};

struct TokenDistribution {
  std::vector<double> probs;
};

// Mask position -> chosen token id.
using Fills = std::map<std::size_t, TokenId>;

struct MaskQuery {
  RenderedPrompt prompt;
  Fills filled;
};

// Source of masked-token distributions. Implementations must be safe for
// concurrent read-only use and deterministic for identical queries.
class MaskedLmProvider {
 public:
  virtual ~MaskedLmProvider() = default;

  virtual const Vocab& vocab() = 0;

  // One distribution per unfilled mask, left to right, conditioned on the
  // prompt with `filled` substituted. Throws ContractError if `filled` names
  // a position that is not a mask or nothing is left unfilled.
  virtual std::vector<TokenDistribution> MaskDistributions(
      const RenderedPrompt& prompt, const Fills& filled) = 0;

  virtual std::vector<TokenId> Tokenize(std::string_view text) = 0;

  // Default implementation issues the queries one at a time.
  virtual std::vector<std::vector<TokenDistribution>> MaskDistributionsBatch(
      std::span<const MaskQuery> queries);
};

// Shared precondition check for MaskDistributions implementations.
void CheckMaskQuery(const RenderedPrompt& prompt, const Fills& filled);

// Counts non-overlapping occurrences of `sentinel` in `text`.
std::size_t CountOccurrences(std::string_view text, std::string_view sentinel);

// Zeroes special-token probabilities and renormalizes. A distribution with no
// mass left on ordinary tokens comes back all zero.
TokenDistribution ExcludeSpecial(const TokenDistribution& d, const Vocab& vocab);

// Throws ContractError unless entries are >= 0 and sum to 1 within `tol`.
void CheckNormalized(const TokenDistribution& d, std::size_t vocab_size,
                     double tol = 1e-4);

}  // namespace fewtype
